#include "corpuskit/bpe.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

#include "corpuskit/error.hpp"
#include "corpuskit/fsutil.hpp"
#include "corpuskit/unicode.hpp"

namespace corpuskit {

namespace {

enum class CharClass { Space, Digit, Invalid, Script };

struct Classified {
  CharClass cls;
  int script;
};

Classified classify(const utf8::Decoded& d) {
  if (!d.valid) return {CharClass::Invalid, 0};
  if (uchar::is_space(d.cp)) return {CharClass::Space, 0};
  if (uchar::is_digit(d.cp)) return {CharClass::Digit, 0};
  return {CharClass::Script, uchar::script(d.cp)};
}

constexpr std::uint64_t pair_key(TokenId a, TokenId b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

}  // namespace

std::vector<std::string_view> pretokenize(std::string_view text) {
  std::vector<std::string_view> pieces;
  std::size_t start = 0;
  bool have_prev = false;
  Classified prev{CharClass::Space, 0};
  int prev_script = -1;  // script of the current run, inherited marks included

  for (std::size_t i = 0; i < text.size();) {
    const auto d = utf8::decode(text, i);
    const auto c = classify(d);
    bool boundary = false;
    if (have_prev) {
      if (c.cls == CharClass::Space || c.cls == CharClass::Digit || c.cls == CharClass::Invalid) {
        boundary = true;
      } else if (prev.cls == CharClass::Digit || prev.cls == CharClass::Invalid) {
        boundary = true;
      } else if (prev.cls == CharClass::Space) {
        boundary = false;  // whitespace prefixes the following word
      } else if (uchar::is_inherited_script(c.script)) {
        boundary = false;
      } else {
        boundary = c.script != prev_script;
      }
    }
    if (boundary) {
      pieces.push_back(text.substr(start, i - start));
      start = i;
    }
    if (c.cls == CharClass::Script) {
      if (boundary || prev_script < 0 || !uchar::is_inherited_script(c.script)) prev_script = c.script;
    } else {
      prev_script = -1;
    }
    prev = c;
    have_prev = true;
    i += d.len;
  }
  if (start < text.size()) pieces.push_back(text.substr(start));
  return pieces;
}

BpeVocab::BpeVocab(std::vector<char32_t> chars) : chars_(std::move(chars)) {
  tokens_.reserve(kByteTokens + chars_.size());
  for (std::size_t b = 0; b < kByteTokens; ++b) tokens_.emplace_back(1, static_cast<char>(b));
  for (const auto cp : chars_) {
    if (char_ids_.count(cp) != 0) throw ValidationError("duplicate base character in vocabulary");
    char_ids_.emplace(cp, static_cast<TokenId>(tokens_.size()));
    std::string s;
    utf8::append(s, cp);
    tokens_.push_back(std::move(s));
  }
}

TokenId BpeVocab::add_merge(TokenId left, TokenId right) {
  if (left >= tokens_.size() || right >= tokens_.size()) throw ValidationError("merge references unknown token id");
  if (left < kByteTokens || right < kByteTokens) throw ValidationError("byte-fallback tokens cannot be merged");
  const auto id = static_cast<TokenId>(tokens_.size());
  if (!merge_rank_.emplace(pair_key(left, right), std::make_pair(static_cast<std::uint32_t>(merges_.size()), id)).second) {
    throw ValidationError("duplicate merge in vocabulary");
  }
  merges_.emplace_back(left, right);
  tokens_.push_back(tokens_[left] + tokens_[right]);
  return id;
}

void BpeVocab::encode_piece(std::string_view piece, std::vector<TokenId>& out) const {
  std::vector<TokenId> syms;
  for (std::size_t i = 0; i < piece.size();) {
    const auto d = utf8::decode(piece, i);
    const auto it = d.valid ? char_ids_.find(d.cp) : char_ids_.end();
    if (it != char_ids_.end()) {
      syms.push_back(it->second);
    } else {
      for (std::size_t k = 0; k < d.len; ++k) syms.push_back(static_cast<unsigned char>(piece[i + k]));
    }
    i += d.len;
  }
  while (syms.size() > 1) {
    std::uint32_t best_rank = std::numeric_limits<std::uint32_t>::max();
    std::size_t best_pos = 0;
    TokenId best_id = 0;
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      const auto it = merge_rank_.find(pair_key(syms[i], syms[i + 1]));
      if (it != merge_rank_.end() && it->second.first < best_rank) {
        best_rank = it->second.first;
        best_pos = i;
        best_id = it->second.second;
      }
    }
    if (best_rank == std::numeric_limits<std::uint32_t>::max()) break;
    syms[best_pos] = best_id;
    syms.erase(syms.begin() + static_cast<std::ptrdiff_t>(best_pos) + 1);
  }
  out.insert(out.end(), syms.begin(), syms.end());
}

std::vector<TokenId> BpeVocab::encode(std::string_view text) const {
  std::vector<TokenId> out;
  out.reserve(text.size() / 3 + 1);
  for (const auto piece : pretokenize(text)) encode_piece(piece, out);
  return out;
}

std::string BpeVocab::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (const auto id : ids) {
    if (id >= tokens_.size()) throw ValidationError("token id " + std::to_string(id) + " out of range");
    out += tokens_[id];
  }
  return out;
}

std::string BpeVocab::serialize() const {
  std::ostringstream out;
  out << "corpuskit-bpe v1 vocab_size=" << size() << " chars=" << chars_.size() << " merges=" << merges_.size()
      << " byte_fallback=1 digit_split=1 script_split=1 multiword=0\n";
  out << std::hex;
  for (const auto cp : chars_) out << "c " << static_cast<std::uint32_t>(cp) << '\n';
  out << std::dec;
  for (const auto& [l, r] : merges_) out << "m " << l << ' ' << r << '\n';
  return out.str();
}

BpeVocab BpeVocab::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string header;
  if (!std::getline(in, header) || header.rfind("corpuskit-bpe v1", 0) != 0) {
    throw ValidationError("not a corpuskit-bpe v1 vocabulary");
  }
  std::vector<char32_t> chars;
  std::vector<std::pair<TokenId, TokenId>> merges;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "c") {
      std::uint32_t cp = 0;
      if (!(ls >> std::hex >> cp)) throw ValidationError("bad character line " + std::to_string(line_no));
      chars.push_back(static_cast<char32_t>(cp));
    } else if (tag == "m") {
      TokenId l = 0, r = 0;
      if (!(ls >> l >> r)) throw ValidationError("bad merge line " + std::to_string(line_no));
      merges.emplace_back(l, r);
    } else {
      throw ValidationError("unknown vocabulary line " + std::to_string(line_no));
    }
  }
  BpeVocab v(std::move(chars));
  for (const auto& [l, r] : merges) v.add_merge(l, r);
  return v;
}

void BpeVocab::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

BpeVocab BpeVocab::load(const std::filesystem::path& path) { return parse(read_file(path)); }

namespace {

struct Word {
  std::vector<TokenId> syms;
  std::uint64_t freq = 0;
};

class MergeTrainer {
 public:
  MergeTrainer(BpeVocab& vocab, std::vector<Word> words) : vocab_(vocab), words_(std::move(words)) {
    stamp_.assign(words_.size(), std::numeric_limits<std::size_t>::max());
    for (std::uint32_t w = 0; w < words_.size(); ++w) add_word(w, +1, true);
  }

  bool step() {
    if (queue_.empty()) return false;
    const auto best = *queue_.begin();
    const auto key = pair_key(best.left, best.right);
    const TokenId merged = vocab_.add_merge(best.left, best.right);
    const auto step_no = vocab_.merges().size();

    auto where = std::move(where_[key]);
    where_.erase(key);
    for (const auto w : where) {
      if (stamp_[w] == step_no) continue;
      stamp_[w] = step_no;
      auto& syms = words_[w].syms;
      bool present = false;
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
        if (syms[i] == best.left && syms[i + 1] == best.right) {
          present = true;
          break;
        }
      }
      if (!present) continue;
      add_word(w, -1, false);
      std::vector<TokenId> out;
      out.reserve(syms.size());
      for (std::size_t i = 0; i < syms.size(); ++i) {
        if (i + 1 < syms.size() && syms[i] == best.left && syms[i + 1] == best.right) {
          out.push_back(merged);
          ++i;
        } else {
          out.push_back(syms[i]);
        }
      }
      syms = std::move(out);
      add_word(w, +1, true);
    }
    return true;
  }

 private:
  struct Candidate {
    std::int64_t count;
    TokenId left, right;
  };

  struct Order {
    const BpeVocab* vocab;
    bool operator()(const Candidate& a, const Candidate& b) const {
      if (a.count != b.count) return a.count > b.count;
      const auto& al = vocab->token(a.left);
      const auto& bl = vocab->token(b.left);
      if (const int c = al.compare(bl); c != 0) return c < 0;
      if (const int c = vocab->token(a.right).compare(vocab->token(b.right)); c != 0) return c < 0;
      if (a.left != b.left) return a.left < b.left;
      return a.right < b.right;
    }
  };

  static bool mergeable(TokenId a, TokenId b) { return a >= BpeVocab::kByteTokens && b >= BpeVocab::kByteTokens; }

  void change(TokenId a, TokenId b, std::int64_t delta) {
    const auto key = pair_key(a, b);
    auto& c = counts_[key];
    if (c > 0) queue_.erase(Candidate{c, a, b});
    c += delta;
    if (c > 0) {
      queue_.insert(Candidate{c, a, b});
    } else {
      counts_.erase(key);
    }
  }

  void add_word(std::uint32_t w, int sign, bool record) {
    const auto& word = words_[w];
    const auto delta = static_cast<std::int64_t>(word.freq) * sign;
    for (std::size_t i = 0; i + 1 < word.syms.size(); ++i) {
      const auto a = word.syms[i], b = word.syms[i + 1];
      if (!mergeable(a, b)) continue;
      change(a, b, delta);
      if (record) where_[pair_key(a, b)].push_back(w);
    }
  }

  BpeVocab& vocab_;
  std::vector<Word> words_;
  std::vector<std::size_t> stamp_;
  std::unordered_map<std::uint64_t, std::int64_t> counts_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> where_;
  std::set<Candidate, Order> queue_{Order{&vocab_}};
};

}  // namespace

BpeVocab train_bpe_text(std::string_view corpus, const BpeOptions& options) {
  if (!(options.coverage > 0.0 && options.coverage <= 1.0)) throw ValidationError("coverage must be in (0, 1]");

  std::unordered_map<std::string_view, std::uint64_t> piece_counts;
  for (const auto p : pretokenize(corpus)) ++piece_counts[p];

  std::unordered_map<char32_t, std::uint64_t> char_counts;
  std::uint64_t total_chars = 0;
  for (const auto& [piece, n] : piece_counts) {
    for (std::size_t i = 0; i < piece.size();) {
      const auto d = utf8::decode(piece, i);
      if (d.valid) {
        char_counts[d.cp] += n;
        total_chars += n;
      }
      i += d.len;
    }
  }
  std::vector<std::pair<char32_t, std::uint64_t>> ranked(char_counts.begin(), char_counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<char32_t> chars;
  std::uint64_t covered = 0;
  for (const auto& [cp, n] : ranked) {
    if (total_chars != 0 && static_cast<double>(covered) >= options.coverage * static_cast<double>(total_chars)) break;
    chars.push_back(cp);
    covered += n;
  }

  BpeVocab vocab(std::move(chars));
  if (options.vocab_size <= vocab.base_size()) {
    throw ValidationError("vocab_size " + std::to_string(options.vocab_size) + " does not exceed the base alphabet of " +
                          std::to_string(vocab.base_size()));
  }

  // Sorted so that word order (and thus everything downstream) does not
  // depend on hash-map iteration order.
  std::vector<std::pair<std::string_view, std::uint64_t>> pieces(piece_counts.begin(), piece_counts.end());
  std::sort(pieces.begin(), pieces.end());
  std::vector<Word> words;
  words.reserve(pieces.size());
  for (const auto& [piece, n] : pieces) {
    Word w;
    w.freq = n;
    const auto ids = vocab.encode(piece);
    w.syms.assign(ids.begin(), ids.end());
    if (w.syms.size() > 1) words.push_back(std::move(w));
  }

  MergeTrainer trainer(vocab, std::move(words));
  while (vocab.size() < options.vocab_size && trainer.step()) {
  }
  return vocab;
}

BpeVocab train_bpe(const std::map<std::string, std::string>& samples, const ByteBudget& budget,
                   const BpeOptions& options) {
  std::uint64_t total = 0;
  std::string corpus;
  for (const auto& [lang, bytes] : budget) {
    if (bytes == 0) continue;
    const auto it = samples.find(lang);
    if (it == samples.end()) throw ValidationError("no tokenizer sample for language '" + lang + "'");
    if (it->second.size() < bytes) {
      throw ValidationError("language '" + lang + "' has " + std::to_string(it->second.size()) +
                            " sample bytes but the budget asks for " + std::to_string(bytes));
    }
    const auto cut = utf8::floor_boundary(it->second, static_cast<std::size_t>(bytes));
    if (!corpus.empty()) corpus.push_back('\n');
    corpus.append(it->second, 0, cut);
    total += bytes;
  }
  if (total == 0) throw ValidationError("byte budget is empty");
  return train_bpe_text(corpus, options);
}

}  // namespace corpuskit
