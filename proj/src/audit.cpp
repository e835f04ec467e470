#include "corpuskit/audit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "corpuskit/error.hpp"
#include "corpuskit/metrics.hpp"
#include "corpuskit/process.hpp"
#include "corpuskit/unicode.hpp"

namespace corpuskit {

EchoGenerator::EchoGenerator(const std::vector<Document>& docs) {
  for (const auto& d : docs) texts_[d.id] = d.text;
}

std::string EchoGenerator::generate(const GenerationRequest& request) {
  const auto it = texts_.find(request.doc_id);
  if (it == texts_.end() || it->second.compare(0, request.prompt.size(), request.prompt) != 0) {
    throw Error("echo generator has no document '" + request.doc_id + "' with that prompt");
  }
  return it->second.substr(request.prompt.size());
}

std::string CommandGenerator::generate(const GenerationRequest& request) {
  return run_command(command_, request.prompt);
}

nlohmann::json AuditRecord::to_json() const {
  nlohmann::json j = {{"doc_id", doc_id},
                      {"lang", lang},
                      {"doc_tokens", doc_tokens},
                      {"reference_tokens", reference_tokens},
                      {"chrf", chrf},
                      {"edit_distance", edit_distance},
                      {"flagged", flagged}};
  if (error) j["error"] = *error;
  return j;
}

double AuditResult::flagged_fraction() const {
  std::uint64_t ok = 0, flagged = 0;
  for (const auto& r : records) {
    if (r.error) continue;
    ++ok;
    if (r.flagged) ++flagged;
  }
  return ok == 0 ? 0.0 : static_cast<double>(flagged) / static_cast<double>(ok);
}

std::string AuditResult::to_jsonl() const {
  std::string out;
  for (const auto& r : records) {
    out += r.to_json().dump();
    out.push_back('\n');
  }
  return out;
}

std::string AuditResult::summary_tsv() const {
  std::ostringstream out;
  out << kAuditSummaryHeader << '\n' << std::fixed;
  for (const auto& row : per_language) {
    out << row.label << '\t' << row.docs << '\t' << std::setprecision(0) << row.avg_tokens << '\t'
        << std::setprecision(1) << row.chrf_avg << '\t' << row.chrf_max << '\t' << std::setprecision(2)
        << row.edit_avg << '\n';
  }
  return out.str();
}

namespace {

std::size_t decoded_length(const BpeVocab& vocab, const std::vector<TokenId>& ids, std::size_t count) {
  std::size_t bytes = 0;
  for (std::size_t i = 0; i < count; ++i) bytes += vocab.token(ids[i]).size();
  return bytes;
}

}  // namespace

AuditSplit split_for_audit(const BpeVocab& vocab, std::string_view text) {
  const auto ids = vocab.encode(text);
  const auto cut = utf8::floor_boundary(text, decoded_length(vocab, ids, ids.size() / 2));
  AuditSplit s;
  s.prompt.assign(text.substr(0, cut));
  s.reference.assign(text.substr(cut));
  s.doc_tokens = ids.size();
  s.reference_tokens = vocab.count(s.reference);
  return s;
}

std::string truncate_to_tokens(const BpeVocab& vocab, std::string_view text, std::size_t max_tokens) {
  const auto ids = vocab.encode(text);
  if (ids.size() <= max_tokens) return std::string(text);
  return std::string(text.substr(0, utf8::floor_boundary(text, decoded_length(vocab, ids, max_tokens))));
}

AuditResult memorization_audit(const std::vector<Document>& docs, TextGenerator& generator, const BpeVocab& vocab) {
  AuditResult result;
  struct Acc {
    std::uint64_t docs = 0;
    double tokens = 0.0, chrf = 0.0, chrf_max = 0.0, edit = 0.0;
  };
  std::map<std::string, Acc> acc;

  for (const auto& doc : docs) {
    AuditRecord rec;
    rec.doc_id = doc.id;
    rec.lang = doc.lang.code;
    const auto split = split_for_audit(vocab, doc.text);
    rec.doc_tokens = split.doc_tokens;
    rec.reference_tokens = split.reference_tokens;
    try {
      const auto raw = generator.generate({doc.id, split.prompt, split.reference_tokens});
      const auto gen = truncate_to_tokens(vocab, raw, split.reference_tokens);
      rec.chrf = chrf_pp(gen, split.reference);
      rec.edit_distance = word_edit_distance(gen, split.reference);
      rec.flagged = rec.chrf > kMemorizationFlagChrf;
    } catch (const std::exception& e) {
      rec.error = e.what();
      ++result.failures;
    }
    if (!rec.error) {
      auto& a = acc[doc.lang.code];
      ++a.docs;
      a.tokens += static_cast<double>(rec.doc_tokens);
      a.chrf += rec.chrf;
      a.chrf_max = std::max(a.chrf_max, rec.chrf);
      a.edit += rec.edit_distance;
    }
    result.records.push_back(std::move(rec));
  }

  for (const auto& [lang, a] : acc) {
    const double n = static_cast<double>(a.docs);
    result.per_language.push_back({display_label(language(lang)), a.docs, a.tokens / n, a.chrf / n, a.chrf_max, a.edit / n});
  }
  return result;
}

}  // namespace corpuskit
