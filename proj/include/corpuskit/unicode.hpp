#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace corpuskit {

namespace utf8 {

struct Decoded {
  char32_t cp = 0;
  std::size_t len = 1;
  bool valid = false;
};

// Decodes the code point starting at byte `pos`. Invalid or truncated
// sequences yield valid=false and len=1 so callers can step byte-wise.
Decoded decode(std::string_view s, std::size_t pos);

bool is_valid(std::string_view s);
void append(std::string& out, char32_t cp);
std::size_t length(std::string_view s);

// Largest code point boundary <= pos.
std::size_t floor_boundary(std::string_view s, std::size_t pos);

std::vector<char32_t> code_points(std::string_view s);

}  // namespace utf8

namespace uchar {

bool is_punct(char32_t cp);  // Unicode P* plus ASCII symbols
bool is_digit(char32_t cp);  // Nd
bool is_alpha(char32_t cp);
bool is_alnum(char32_t cp);
bool is_upper(char32_t cp);
bool is_space(char32_t cp);
bool is_mark(char32_t cp);
char32_t to_lower(char32_t cp);

// ICU UScriptCode value; Common and Inherited are reported as such.
int script(char32_t cp);
bool is_common_script(int script);
bool is_inherited_script(int script);

}  // namespace uchar

std::string to_lower(std::string_view s);

// Words as used by every statistic: whitespace-separated runs with
// punctuation and digit characters removed; empty residues are dropped.
std::vector<std::string> split_words(std::string_view text);

std::vector<std::string_view> split_whitespace(std::string_view text);

}  // namespace corpuskit
