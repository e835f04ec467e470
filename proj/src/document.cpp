#include "corpuskit/document.hpp"

#include <array>
#include <cctype>

#include "corpuskit/error.hpp"
#include "corpuskit/unicode.hpp"

namespace corpuskit {

namespace {

constexpr std::array<std::string_view, 17> kFocusLanguages = {
    "bs", "bg", "hr", "cs", "et", "fi", "de", "lv", "lt", "mk", "pl", "ro", "ru", "sr", "sk", "sl", "uk"};

constexpr std::array<std::string_view, 17> kOtherLanguages = {
    "sq", "da", "nl", "en", "fr", "hu", "is", "ga", "it", "ltg", "mt", "cnr", "no", "pt", "es", "sv", "tr"};

}  // namespace

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Focus:
      return "focus";
    case Category::Other:
      return "other";
    case Category::Code:
      return "code";
    case Category::Math:
      return "math";
    case Category::Parallel:
      return "parallel";
  }
  return "other";
}

Category category_from_string(std::string_view s) {
  const auto lower = to_lower(s);
  if (lower == "focus") return Category::Focus;
  if (lower == "other") return Category::Other;
  if (lower == "code") return Category::Code;
  if (lower == "math") return Category::Math;
  if (lower == "parallel") return Category::Parallel;
  throw ValidationError("unknown language category '" + std::string(s) + "'");
}

LanguageTag language(std::string_view code) {
  LanguageTag tag{to_lower(code), Category::Other};
  if (tag.code == "code") {
    tag.category = Category::Code;
  } else if (tag.code == "math") {
    tag.category = Category::Math;
  } else if (tag.code == "parallel" || tag.code == "par") {
    tag.category = Category::Parallel;
  } else {
    for (const auto f : kFocusLanguages) {
      if (tag.code == f) tag.category = Category::Focus;
    }
  }
  return tag;
}

std::string display_label(const LanguageTag& lang) {
  switch (lang.category) {
    case Category::Parallel:
      return "PAR.";
    case Category::Code:
      return "CODE";
    case Category::Math:
      return "MATH";
    default:
      break;
  }
  std::string out = lang.code;
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

LanguageRegistry LanguageRegistry::with_defaults() {
  LanguageRegistry reg;
  for (const auto c : kFocusLanguages) reg.add(language(c));
  for (const auto c : kOtherLanguages) reg.add(language(c));
  reg.add(language("code"));
  reg.add(language("math"));
  reg.add(language("parallel"));
  return reg;
}

void LanguageRegistry::add(LanguageTag tag) {
  if (tag.code.empty()) throw ValidationError("language code must be non-empty");
  if (tags_.count(tag.code) != 0) throw ValidationError("duplicate language code '" + tag.code + "'");
  auto key = tag.code;
  tags_.emplace(std::move(key), std::move(tag));
}

const LanguageTag* LanguageRegistry::find(std::string_view code) const {
  const auto it = tags_.find(to_lower(code));
  return it == tags_.end() ? nullptr : &it->second;
}

const LanguageTag& LanguageRegistry::get_or_add(std::string_view code) {
  auto tag = language(code);
  if (tag.code.empty()) throw ValidationError("language code must be non-empty");
  auto it = tags_.find(tag.code);
  if (it == tags_.end()) {
    auto key = tag.code;
    it = tags_.emplace(std::move(key), std::move(tag)).first;
  }
  return it->second;
}

std::vector<LanguageTag> LanguageRegistry::all() const {
  std::vector<LanguageTag> out;
  for (const auto& [_, t] : tags_) out.push_back(t);
  return out;
}

std::vector<LanguageTag> LanguageRegistry::in_category(Category c) const {
  std::vector<LanguageTag> out;
  for (const auto& [_, t] : tags_) {
    if (t.category == c) out.push_back(t);
  }
  return out;
}

std::string Paragraph::text() const {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i != 0) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

std::vector<Paragraph> split_paragraphs(const Document& doc) { return split_paragraphs(doc.text, doc.id); }

std::vector<Paragraph> split_paragraphs(std::string_view text, std::string_view parent_id) {
  std::vector<Paragraph> out;
  Paragraph cur{std::string(parent_id), 0, {}};
  auto flush = [&] {
    bool blank = true;
    for (const auto& l : cur.lines) {
      if (!l.empty()) blank = false;
    }
    if (!cur.lines.empty() && !blank) {
      cur.index = out.size();
      out.push_back(cur);
    }
    cur.lines.clear();
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    const auto line = text.substr(pos, end - pos);
    if (line.empty()) {
      // An empty line means at least two consecutive newlines.
      flush();
    } else {
      cur.lines.emplace_back(line);
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  flush();
  return out;
}

std::string join_paragraphs(const std::vector<Paragraph>& paragraphs) {
  std::string out;
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    if (i != 0) out += "\n\n";
    out += paragraphs[i].text();
  }
  return out;
}

}  // namespace corpuskit
