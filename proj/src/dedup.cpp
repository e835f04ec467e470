#include "corpuskit/dedup.hpp"

#include "corpuskit/error.hpp"
#include "corpuskit/fsutil.hpp"
#include "corpuskit/hash.hpp"
#include "corpuskit/unicode.hpp"

namespace corpuskit {

std::string normalize_line(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < line.size();) {
    const auto d = utf8::decode(line, i);
    i += d.len;
    if (!d.valid) continue;
    if (uchar::is_space(d.cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (!uchar::is_alnum(d.cp) && !uchar::is_mark(d.cp)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    utf8::append(out, uchar::to_lower(d.cp));
  }
  return out;
}

bool LineIndex::check_and_insert(std::string_view normalized) {
  const auto h = fnv1a64(normalized);
  if (track_counts) ++occurrence_counts[h];
  return !seen.insert(h).second;
}

std::string_view to_string(DedupAction a) {
  switch (a) {
    case DedupAction::Kept:
      return "kept";
    case DedupAction::LineTrimmed:
      return "line-trimmed";
    case DedupAction::Dropped:
      return "dropped";
  }
  return "kept";
}

LineDedupResult exact_line_dedup(const Document& doc, LineIndex& index) {
  LineDedupResult result;
  std::string out;
  out.reserve(doc.text.size());
  bool first = true;
  const auto lines = split(doc.text, '\n');
  for (const auto& line : lines) {
    const auto norm = normalize_line(line);
    if (!norm.empty()) {
      ++result.total_lines;
      if (index.check_and_insert(norm)) {
        ++result.removed_lines;
        continue;
      }
    }
    if (!first) out.push_back('\n');
    out += line;
    first = false;
  }
  if (trim(out).empty()) return result;
  Document kept = doc;
  if (result.removed_lines != 0) kept.text = std::move(out);
  result.doc = std::move(kept);
  return result;
}

std::vector<Document> exact_line_dedup(const std::vector<Document>& docs, LineIndex& index) {
  std::vector<Document> out;
  for (const auto& d : docs) {
    if (auto r = exact_line_dedup(d, index); r.doc) out.push_back(std::move(*r.doc));
  }
  return out;
}

void NGramState::validate() const {
  if (n < 1) throw ValidationError("n-gram size must be >= 1");
  if (!(dup_threshold > 0.0 && dup_threshold <= 1.0)) throw ValidationError("dup_threshold must be in (0, 1]");
  if (!(doc_threshold > 0.0 && doc_threshold <= 1.0)) throw ValidationError("doc_threshold must be in (0, 1]");
}

std::vector<std::uint64_t> paragraph_ngrams(std::string_view paragraph_text, int n) {
  const auto norm = normalize_line(paragraph_text);
  std::vector<std::string> words;
  if (!norm.empty()) words = split(norm, ' ');
  std::vector<std::uint64_t> grams;
  const auto un = static_cast<std::size_t>(n);
  if (words.size() < un) return grams;
  grams.reserve(words.size() - un + 1);
  std::string joined;
  for (std::size_t i = 0; i + un <= words.size(); ++i) {
    joined.clear();
    for (std::size_t k = 0; k < un; ++k) {
      if (k != 0) joined.push_back(' ');
      joined += words[i + k];
    }
    grams.push_back(fnv1a64(joined));
  }
  return grams;
}

OnionResult onion_paragraph_dedup(const Document& doc, NGramState& state) {
  OnionResult result;
  auto paragraphs = split_paragraphs(doc);
  result.total_paragraphs = paragraphs.size();

  std::vector<std::vector<std::uint64_t>> grams(paragraphs.size());
  std::vector<bool> duplicate(paragraphs.size(), false);
  for (std::size_t p = 0; p < paragraphs.size(); ++p) {
    grams[p] = paragraph_ngrams(paragraphs[p].text(), state.n);
    if (grams[p].empty()) continue;
    std::size_t hits = 0;
    for (const auto g : grams[p]) hits += state.seen.count(g);
    const double ratio = static_cast<double>(hits) / static_cast<double>(grams[p].size());
    if (ratio > state.dup_threshold) {
      duplicate[p] = true;
      ++result.duplicate_paragraphs;
    }
  }
  if (result.total_paragraphs != 0) {
    result.dup_ratio =
        static_cast<double>(result.duplicate_paragraphs) / static_cast<double>(result.total_paragraphs);
  }
  const bool drop = result.dup_ratio > state.doc_threshold;

  if (!drop || state.seed_dropped) {
    for (const auto& g : grams) state.seen.insert(g.begin(), g.end());
  }
  if (drop) return result;

  if (result.duplicate_paragraphs == 0) {
    result.doc = doc;
    return result;
  }
  std::vector<Paragraph> kept;
  for (std::size_t p = 0; p < paragraphs.size(); ++p) {
    if (!duplicate[p]) kept.push_back(std::move(paragraphs[p]));
  }
  Document out = doc;
  out.text = join_paragraphs(kept);
  result.doc = std::move(out);
  return result;
}

DedupMode dedup_mode_from_string(std::string_view s) {
  if (s == "corpus" || s == "whole-corpus") return DedupMode::Corpus;
  if (s == "source" || s == "per-source") return DedupMode::Source;
  if (s == "lines-only" || s == "skip-onion") return DedupMode::LinesOnly;
  throw ValidationError("unknown dedup mode '" + std::string(s) + "' (expected corpus|source|lines-only)");
}

std::string_view to_string(DedupMode m) {
  switch (m) {
    case DedupMode::Corpus:
      return "corpus";
    case DedupMode::Source:
      return "source";
    case DedupMode::LinesOnly:
      return "lines-only";
  }
  return "corpus";
}

DedupMode DedupConfig::mode_for(const std::string& lang) const {
  const auto it = per_language.find(lang);
  return it == per_language.end() ? default_mode : it->second;
}

NGramState DedupConfig::fresh_state() const {
  NGramState s;
  s.n = n;
  s.dup_threshold = dup_threshold;
  s.doc_threshold = doc_threshold;
  s.seed_dropped = seed_dropped;
  s.validate();
  return s;
}

namespace {

std::string state_key(const Document& d, DedupMode mode) {
  if (mode == DedupMode::Source) return d.lang.code + '\x1f' + d.source;
  return d.lang.code;
}

}  // namespace

DedupOutput run_exact_lines(const std::vector<Document>& docs, const DedupConfig& config) {
  DedupOutput out;
  std::map<std::string, LineIndex> indexes;
  for (const auto& d : docs) {
    auto& index = indexes[state_key(d, config.mode_for(d.lang.code))];
    auto r = exact_line_dedup(d, index);
    DedupReport rep{d.id, DedupAction::Kept, 0.0};
    if (r.total_lines != 0) rep.dup_ratio = static_cast<double>(r.removed_lines) / static_cast<double>(r.total_lines);
    if (!r.doc) {
      rep.action = DedupAction::Dropped;
    } else {
      if (r.removed_lines != 0) rep.action = DedupAction::LineTrimmed;
      out.docs.push_back(std::move(*r.doc));
    }
    out.report.push_back(std::move(rep));
  }
  return out;
}

DedupOutput run_onion(const std::vector<Document>& docs, const DedupConfig& config) {
  DedupOutput out;
  std::map<std::string, NGramState> states;
  for (const auto& d : docs) {
    const auto mode = config.mode_for(d.lang.code);
    if (mode == DedupMode::LinesOnly) {
      out.docs.push_back(d);
      out.report.push_back({d.id, DedupAction::Kept, 0.0});
      continue;
    }
    const auto key = state_key(d, mode);
    auto it = states.find(key);
    if (it == states.end()) it = states.emplace(key, config.fresh_state()).first;
    auto r = onion_paragraph_dedup(d, it->second);
    DedupReport rep{d.id, DedupAction::Kept, r.dup_ratio};
    if (!r.doc) {
      rep.action = DedupAction::Dropped;
    } else {
      if (r.duplicate_paragraphs != 0) rep.action = DedupAction::LineTrimmed;
      out.docs.push_back(std::move(*r.doc));
    }
    out.report.push_back(std::move(rep));
  }
  return out;
}

DedupOutput dedup_pipeline(const std::vector<Document>& docs, const DedupConfig& config) {
  auto lines = run_exact_lines(docs, config);
  auto onion = run_onion(lines.docs, config);

  std::unordered_map<std::string, const DedupReport*> onion_by_id;
  for (const auto& r : onion.report) onion_by_id[r.id] = &r;

  DedupOutput out;
  out.docs = std::move(onion.docs);
  for (auto& r : lines.report) {
    DedupReport merged{r.id, r.action, 0.0};
    if (r.action != DedupAction::Dropped) {
      if (const auto it = onion_by_id.find(r.id); it != onion_by_id.end()) {
        merged.dup_ratio = it->second->dup_ratio;
        if (it->second->action != DedupAction::Kept) merged.action = it->second->action;
      }
    }
    out.report.push_back(std::move(merged));
  }
  return out;
}

}  // namespace corpuskit
