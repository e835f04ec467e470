#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace corpuskit {

using TokenId = std::uint32_t;

// Bytes of tokenizer training text allocated per language.
using ByteBudget = std::map<std::string, std::uint64_t>;

// Splits text into the units merges may not cross: whitespace starts a new
// piece (and prefixes the word that follows), every digit is its own
// piece, and a change of Unicode script starts a new piece. Concatenating
// the pieces gives back the input byte for byte.
std::vector<std::string_view> pretokenize(std::string_view text);

struct BpeOptions {
  std::size_t vocab_size = 4096;
  double coverage = 0.99995;
};

// Byte-level-fallback BPE vocabulary. Ids 0..255 are raw bytes, then one
// id per covered character, then one id per merge in training order.
class BpeVocab {
 public:
  static constexpr std::size_t kByteTokens = 256;

  BpeVocab() = default;
  explicit BpeVocab(std::vector<char32_t> chars);

  std::size_t size() const { return tokens_.size(); }
  std::size_t base_size() const { return kByteTokens + chars_.size(); }
  const std::vector<char32_t>& chars() const { return chars_; }
  const std::vector<std::pair<TokenId, TokenId>>& merges() const { return merges_; }
  const std::string& token(TokenId id) const { return tokens_[id]; }

  // Appends a merge; returns the new id.
  TokenId add_merge(TokenId left, TokenId right);

  std::vector<TokenId> encode(std::string_view text) const;
  std::string decode(std::span<const TokenId> ids) const;
  std::size_t count(std::string_view text) const { return encode(text).size(); }

  // Text format: a header line, one `c <hex code point>` line per base
  // character, then one `m <left id> <right id>` line per merge.
  std::string serialize() const;
  static BpeVocab parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static BpeVocab load(const std::filesystem::path& path);

  friend bool operator==(const BpeVocab& a, const BpeVocab& b) {
    return a.chars_ == b.chars_ && a.merges_ == b.merges_;
  }

 private:
  void encode_piece(std::string_view piece, std::vector<TokenId>& out) const;

  std::vector<std::string> tokens_;
  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, TokenId> char_ids_;
  std::vector<std::pair<TokenId, TokenId>> merges_;
  std::unordered_map<std::uint64_t, std::pair<std::uint32_t, TokenId>> merge_rank_;
};

// Greedy most-frequent-pair training on one text. Ties go to the
// lexicographically smaller (left, right) token-string pair. Training stops
// early when no mergeable pair remains.
BpeVocab train_bpe_text(std::string_view corpus, const BpeOptions& options);

// Builds the training text from the first budget[lang] bytes of each
// language's sample (cut back to a character boundary), then trains.
BpeVocab train_bpe(const std::map<std::string, std::string>& samples, const ByteBudget& budget,
                   const BpeOptions& options);

}  // namespace corpuskit
