#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpuskit/bpe.hpp"
#include "corpuskit/document.hpp"

namespace corpuskit {

struct GenerationRequest {
  std::string doc_id;
  std::string prompt;
  std::size_t max_tokens = 0;
};

class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  virtual std::string generate(const GenerationRequest& request) = 0;
};

// Returns the true continuation of the requested document.
class EchoGenerator : public TextGenerator {
 public:
  explicit EchoGenerator(const std::vector<Document>& docs);
  std::string generate(const GenerationRequest& request) override;

 private:
  std::map<std::string, std::string> texts_;
};

class FixedTextGenerator : public TextGenerator {
 public:
  explicit FixedTextGenerator(std::string text) : text_(std::move(text)) {}
  std::string generate(const GenerationRequest&) override { return text_; }

 private:
  std::string text_;
};

// Runs a shell command per document: prompt on stdin, continuation on stdout.
class CommandGenerator : public TextGenerator {
 public:
  explicit CommandGenerator(std::string command) : command_(std::move(command)) {}
  std::string generate(const GenerationRequest& request) override;

 private:
  std::string command_;
};

inline constexpr double kMemorizationFlagChrf = 45.0;

struct AuditRecord {
  std::string doc_id;
  std::string lang;
  std::uint64_t doc_tokens = 0;
  std::uint64_t reference_tokens = 0;
  double chrf = 0.0;
  double edit_distance = 0.0;
  bool flagged = false;
  std::optional<std::string> error;

  nlohmann::json to_json() const;
};

struct AuditLanguageRow {
  std::string label;
  std::uint64_t docs = 0;
  double avg_tokens = 0.0;
  double chrf_avg = 0.0;
  double chrf_max = 0.0;
  double edit_avg = 0.0;
};

struct AuditResult {
  std::vector<AuditRecord> records;
  std::vector<AuditLanguageRow> per_language;
  std::uint64_t failures = 0;

  double flagged_fraction() const;
  std::string to_jsonl() const;
  std::string summary_tsv() const;
};

inline constexpr std::string_view kAuditSummaryHeader =
    "Lang.\tDocs\tAvg. tok.\tChrF++ Avg.\tChrF++ Max.\tEdit dist.";

struct AuditSplit {
  std::string prompt;
  std::string reference;
  std::uint64_t doc_tokens = 0;
  std::uint64_t reference_tokens = 0;
};

// Cuts after floor(n/2) tokens, moved back to a character boundary.
AuditSplit split_for_audit(const BpeVocab& vocab, std::string_view text);

// Keeps the longest prefix of `text` that encodes to at most `max_tokens`.
std::string truncate_to_tokens(const BpeVocab& vocab, std::string_view text, std::size_t max_tokens);

AuditResult memorization_audit(const std::vector<Document>& docs, TextGenerator& generator, const BpeVocab& vocab);

}  // namespace corpuskit
