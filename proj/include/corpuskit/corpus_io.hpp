#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpuskit/document.hpp"
#include "corpuskit/fsutil.hpp"

namespace corpuskit {

struct RecordError {
  std::size_t line = 0;
  std::string message;
};

nlohmann::json to_json(const Document& doc);

// Streams documents from a JSON Lines corpus file. Malformed records are
// collected in errors() with their 1-based line numbers and skipped.
class CorpusReader {
 public:
  // `default_lang` applies to records without a `lang` key; when it is
  // empty such records are schema violations.
  explicit CorpusReader(const std::filesystem::path& path, LanguageTag default_lang = {});

  std::optional<Document> next();
  const std::vector<RecordError>& errors() const { return errors_; }

 private:
  std::optional<Document> parse(const std::string& line);

  std::filesystem::path path_;
  std::ifstream in_;
  LanguageTag default_lang_;
  std::string default_source_;
  std::size_t line_no_ = 0;
  std::vector<RecordError> errors_;
};

struct ReadResult {
  std::vector<Document> docs;
  std::vector<RecordError> errors;
};

ReadResult read_corpus(const std::filesystem::path& path, LanguageTag default_lang = {});

class CorpusWriter {
 public:
  explicit CorpusWriter(const std::filesystem::path& path) : out_(path) {}
  void write(const Document& doc);
  std::size_t count() const { return count_; }
  void commit() { out_.commit(); }

 private:
  AtomicWriter out_;
  std::size_t count_ = 0;
};

// Writes atomically; throws IoError naming how many documents made it out
// before a failure.
std::size_t write_corpus(const std::vector<Document>& docs, const std::filesystem::path& path);

}  // namespace corpuskit
