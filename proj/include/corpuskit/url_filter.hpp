#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "corpuskit/document.hpp"

namespace corpuskit {

// Suffix rules for registrable-domain detection. Plain suffix lines only;
// wildcard (`*.`) and exception (`!`) rules from the upstream list format
// are skipped on load.
class PublicSuffixList {
 public:
  PublicSuffixList() = default;
  explicit PublicSuffixList(std::vector<std::string> suffixes);

  static PublicSuffixList load(const std::filesystem::path& path);
  // Small compiled-in snapshot used when no file is supplied.
  static const PublicSuffixList& builtin();

  // Registrable domain of a lowercase host: the longest matching suffix plus
  // one label, or the last two labels when no suffix matches.
  std::string registrable_domain(std::string_view host) const;

 private:
  std::set<std::string, std::less<>> suffixes_;
};

struct HostInfo {
  std::string host;
  std::string registrable;
  int subdomain_count = 0;
};

// Returns nullopt for URLs without a usable host.
std::optional<HostInfo> parse_host(std::string_view url, const PublicSuffixList& psl = PublicSuffixList::builtin());

enum class UrlRule { Pass, TooManySubdomains, BlacklistedDomain, KeywordMatch, Unparseable };

std::string_view to_string(UrlRule r);

struct FilterVerdict {
  bool keep = true;
  UrlRule rule = UrlRule::Pass;
};

struct UrlRuleSet {
  std::set<std::string, std::less<>> blacklist_domains;
  std::vector<std::string> keyword_blocklist;
  int max_subdomains = 4;

  // Adds domains from a line-oriented blocklist file (`#` comments).
  void load_blacklist(const std::filesystem::path& path);
  void load_keywords(const std::filesystem::path& path);
  void add_domain(std::string_view domain);
  void add_keyword(std::string_view keyword);
  void validate() const;
};

// Rules are checked in order: subdomain count, blacklist, keywords.
// Documents without a URL pass.
FilterVerdict apply_url_filter(const Document& doc, const UrlRuleSet& rules,
                               const PublicSuffixList& psl = PublicSuffixList::builtin());

}  // namespace corpuskit
