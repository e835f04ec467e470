#include "corpuskit/url_filter.hpp"

#include <algorithm>
#include <cctype>

#include "corpuskit/error.hpp"
#include "corpuskit/fsutil.hpp"
#include "corpuskit/unicode.hpp"

namespace corpuskit {

namespace {

const char* const kBuiltinSuffixes[] = {
    "com", "org", "net", "edu", "gov", "int", "mil", "info", "biz", "io", "eu",
    "ac.uk", "co.uk", "gov.uk", "org.uk", "ltd.uk", "me.uk", "net.uk", "plc.uk",
    "com.au", "net.au", "org.au", "edu.au", "gov.au",
    "co.jp", "ne.jp", "or.jp", "co.nz", "org.nz", "co.za", "com.br", "com.cn", "com.tr", "org.tr",
    "com.ua", "org.ua", "kiev.ua", "in.ua", "com.pl", "org.pl", "net.pl", "waw.pl",
    "com.hr", "from.hr", "iz.hr", "co.rs", "org.rs", "in.rs", "edu.rs", "com.mk", "org.mk",
    "com.ba", "org.ba", "co.ba", "com.ro", "org.ro", "com.mt", "org.mt", "com.cy",
    "co.il", "co.kr", "com.mx", "com.ar", "co.in", "com.ru", "msk.ru", "spb.ru", "org.ru",
    "blogspot.com", "github.io", "appspot.com", "herokuapp.com", "wordpress.com", "cloudfront.net",
    "al", "ba", "be", "bg", "by", "ch", "cz", "de", "dk", "ee", "es", "fi", "fr", "gr", "hr", "hu", "ie",
    "is", "it", "li", "lt", "lu", "lv", "md", "me", "mk", "mt", "nl", "no", "pl", "pt", "ro", "rs", "ru",
    "se", "si", "sk", "su", "tr", "ua", "uk", "us", "ca", "au", "jp", "cn", "in", "br", "xyz", "online",
    "site", "top", "club", "shop", "app", "dev", "tv", "cc", "co", "ws"};

bool valid_label(std::string_view label) {
  if (label.empty() || label.size() > 63) return false;
  for (const char c : label) {
    const auto u = static_cast<unsigned char>(c);
    if (u >= 0x80) continue;  // IDN labels are accepted as raw UTF-8
    if (!std::isalnum(u) && c != '-' && c != '_') return false;
  }
  return true;
}

bool is_ipv4(std::string_view host) {
  int dots = 0;
  for (const char c : host) {
    if (c == '.') {
      ++dots;
    } else if (!std::isdigit(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  return dots == 3;
}

std::size_t count_labels(std::string_view s) {
  return s.empty() ? 0 : static_cast<std::size_t>(std::count(s.begin(), s.end(), '.')) + 1;
}

}  // namespace

PublicSuffixList::PublicSuffixList(std::vector<std::string> suffixes) {
  for (auto& s : suffixes) {
    if (s.empty() || s[0] == '*' || s[0] == '!') continue;
    suffixes_.insert(to_lower(s));
  }
}

PublicSuffixList PublicSuffixList::load(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  for (auto& l : read_list_file(path)) {
    if (l.rfind("//", 0) == 0) continue;
    lines.push_back(std::move(l));
  }
  return PublicSuffixList(std::move(lines));
}

const PublicSuffixList& PublicSuffixList::builtin() {
  static const PublicSuffixList psl(std::vector<std::string>(std::begin(kBuiltinSuffixes), std::end(kBuiltinSuffixes)));
  return psl;
}

std::string PublicSuffixList::registrable_domain(std::string_view host) const {
  const auto labels = split(host, '.');
  if (labels.size() <= 1) return std::string(host);
  // Longest matching suffix first.
  for (std::size_t start = 1; start < labels.size(); ++start) {
    std::string suffix;
    for (std::size_t i = start; i < labels.size(); ++i) {
      if (!suffix.empty()) suffix.push_back('.');
      suffix += labels[i];
    }
    if (suffixes_.count(suffix) != 0) {
      std::string out = labels[start - 1];
      out.push_back('.');
      out += suffix;
      return out;
    }
  }
  return labels[labels.size() - 2] + "." + labels.back();
}

std::optional<HostInfo> parse_host(std::string_view url, const PublicSuffixList& psl) {
  std::string_view rest = url;
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.remove_suffix(1);
  if (rest.empty()) return std::nullopt;

  if (const auto scheme = rest.find("://"); scheme != std::string_view::npos) {
    rest = rest.substr(scheme + 3);
  } else if (rest.rfind("//", 0) == 0) {
    rest = rest.substr(2);
  } else if (const auto colon = rest.find(':'); colon != std::string_view::npos && colon > 0 &&
                                                std::isalpha(static_cast<unsigned char>(rest.front())) &&
                                                (colon + 1 == rest.size() ||
                                                 !std::isdigit(static_cast<unsigned char>(rest[colon + 1])))) {
    // Opaque URIs such as mailto: or javascript: have no host.
    return std::nullopt;
  }
  const auto end = rest.find_first_of("/?#");
  auto authority = rest.substr(0, end);
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
  if (authority.empty()) return std::nullopt;
  if (authority.front() == '[') return std::nullopt;  // IPv6 literals carry no domain
  if (const auto colon = authority.find(':'); colon != std::string_view::npos) {
    const auto port = authority.substr(colon + 1);
    if (!std::all_of(port.begin(), port.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return std::nullopt;
    }
    authority = authority.substr(0, colon);
  }
  if (!authority.empty() && authority.back() == '.') authority.remove_suffix(1);

  HostInfo info;
  info.host = to_lower(authority);
  if (info.host.empty()) return std::nullopt;
  for (const auto& label : split(info.host, '.')) {
    if (!valid_label(label)) return std::nullopt;
  }
  if (is_ipv4(info.host)) {
    info.registrable = info.host;
    return info;
  }
  info.registrable = psl.registrable_domain(info.host);
  info.subdomain_count = static_cast<int>(count_labels(info.host) - count_labels(info.registrable));
  return info;
}

std::string_view to_string(UrlRule r) {
  switch (r) {
    case UrlRule::Pass:
      return "Pass";
    case UrlRule::TooManySubdomains:
      return "TooManySubdomains";
    case UrlRule::BlacklistedDomain:
      return "BlacklistedDomain";
    case UrlRule::KeywordMatch:
      return "KeywordMatch";
    case UrlRule::Unparseable:
      return "Unparseable";
  }
  return "Pass";
}

void UrlRuleSet::add_domain(std::string_view domain) {
  std::string d = to_lower(trim(domain));
  if (const auto scheme = d.find("://"); scheme != std::string::npos) d = d.substr(scheme + 3);
  if (const auto slash = d.find('/'); slash != std::string::npos) d.erase(slash);
  while (!d.empty() && d.back() == '.') d.pop_back();
  if (!d.empty()) blacklist_domains.insert(std::move(d));
}

void UrlRuleSet::add_keyword(std::string_view keyword) {
  auto k = to_lower(trim(keyword));
  if (!k.empty()) keyword_blocklist.push_back(std::move(k));
}

void UrlRuleSet::load_blacklist(const std::filesystem::path& path) {
  for (const auto& l : read_list_file(path)) add_domain(l);
}

void UrlRuleSet::load_keywords(const std::filesystem::path& path) {
  for (const auto& l : read_list_file(path)) add_keyword(l);
}

void UrlRuleSet::validate() const {
  if (max_subdomains < 1) throw ValidationError("max_subdomains must be >= 1");
}

FilterVerdict apply_url_filter(const Document& doc, const UrlRuleSet& rules, const PublicSuffixList& psl) {
  if (!doc.url || doc.url->empty()) return {};
  const auto info = parse_host(*doc.url, psl);
  if (!info) return {false, UrlRule::Unparseable};
  if (info->subdomain_count > rules.max_subdomains) return {false, UrlRule::TooManySubdomains};

  // The registrable domain and every ancestor of the host are looked up, so
  // list entries naming a specific subdomain also match.
  std::string_view h = info->host;
  while (true) {
    if (rules.blacklist_domains.count(h) != 0) return {false, UrlRule::BlacklistedDomain};
    if (h.size() <= info->registrable.size()) break;
    const auto dot = h.find('.');
    if (dot == std::string_view::npos) break;
    h.remove_prefix(dot + 1);
  }
  if (rules.blacklist_domains.count(info->registrable) != 0) return {false, UrlRule::BlacklistedDomain};

  const auto lower_url = to_lower(*doc.url);
  for (const auto& k : rules.keyword_blocklist) {
    if (lower_url.find(k) != std::string::npos) return {false, UrlRule::KeywordMatch};
  }
  return {};
}

}  // namespace corpuskit
