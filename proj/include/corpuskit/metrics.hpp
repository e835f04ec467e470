#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace corpuskit {

// total_log_prob is a natural-log sum over tokens.
struct ScoredText {
  std::string text;
  double total_log_prob = 0.0;
  std::uint64_t token_count = 0;
  std::uint64_t char_count = 0;

  // Fills char_count from text.
  static ScoredText from_text(std::string text, double total_log_prob, std::uint64_t token_count);
};

double per_char_perplexity(const ScoredText& s);

// (baseline - ours) / baseline, in percent.
double relative_improvement(double ours, double baseline);

struct BenchmarkTable {
  std::vector<std::string> tasks;
  std::vector<std::string> models;
  std::map<std::string, std::map<std::string, double>> scores;  // model -> task -> score

  void set(const std::string& model, const std::string& task, double score);
};

// Per task the top three get 3/2/1 points; tied models share the mean of
// the points of the positions they span. Returns the mean over tasks.
std::map<std::string, double> borda(const BenchmarkTable& table);

struct ChrfOptions {
  int char_order = 6;
  int word_order = 2;
  double beta = 2.0;
};

// Character n-grams ignore whitespace; word n-grams use words with leading
// and trailing punctuation stripped. Orders where neither side has any
// n-gram are left out of the average.
double chrf_pp(std::string_view hypothesis, std::string_view reference, const ChrfOptions& options = {});

std::vector<std::string> chrf_words(std::string_view text);

std::size_t levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Word-level Levenshtein over whitespace tokens divided by the longer length.
double word_edit_distance(std::string_view hypothesis, std::string_view reference);

}  // namespace corpuskit
