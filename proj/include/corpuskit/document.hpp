#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace corpuskit {

enum class Category { Focus, Other, Code, Math, Parallel };

std::string_view to_string(Category c);
Category category_from_string(std::string_view s);

struct LanguageTag {
  std::string code;
  Category category = Category::Other;

  friend bool operator==(const LanguageTag&, const LanguageTag&) = default;
  friend auto operator<=>(const LanguageTag& a, const LanguageTag& b) { return a.code <=> b.code; }
};

// Tag with the category taken from the built-in table: the seventeen focus
// languages, plus the `code`, `math` and `parallel` pseudo-languages.
// Anything else is Other. The code is lowercased.
LanguageTag language(std::string_view code);

// Label used in report tables: upper-cased code, with PAR./CODE/MATH for
// the pseudo-languages.
std::string display_label(const LanguageTag& lang);

class LanguageRegistry {
 public:
  LanguageRegistry() = default;

  static LanguageRegistry with_defaults();

  // Throws ValidationError on an empty or duplicate code.
  void add(LanguageTag tag);
  const LanguageTag* find(std::string_view code) const;
  // Registers an unknown code via language() on first sight.
  const LanguageTag& get_or_add(std::string_view code);

  std::vector<LanguageTag> all() const;
  std::vector<LanguageTag> in_category(Category c) const;

 private:
  std::map<std::string, LanguageTag, std::less<>> tags_;
};

struct Document {
  std::string id;
  std::optional<std::string> url;
  LanguageTag lang;
  std::string source;
  std::string text;
  std::optional<std::uint64_t> token_count;

  friend bool operator==(const Document&, const Document&) = default;
};

struct Paragraph {
  std::string parent_id;
  std::size_t index = 0;
  std::vector<std::string> lines;

  std::string text() const;
};

// Paragraphs are separated by two or more consecutive newlines; single
// newlines separate lines inside a paragraph. Blank-only paragraphs are
// not produced.
std::vector<Paragraph> split_paragraphs(const Document& doc);
std::vector<Paragraph> split_paragraphs(std::string_view text, std::string_view parent_id = {});
std::string join_paragraphs(const std::vector<Paragraph>& paragraphs);

}  // namespace corpuskit
