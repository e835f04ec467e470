#include "corpuskit/pii.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>

#include "corpuskit/error.hpp"
#include "corpuskit/fsutil.hpp"
#include "corpuskit/hash.hpp"

namespace corpuskit {

namespace {

constexpr std::string_view kSyntheticIbanCountry = "ZZ";
constexpr std::string_view kSyntheticCardPrefix = "40000000";
constexpr std::string_view kSyntheticPhoneDigits = "155501";
constexpr std::string_view kSyntheticEmailTld = ".invalid";

constexpr std::array<std::string_view, 12> kNames = {"anna", "jonas", "marta", "peter", "ieva", "olga",
                                                     "tomas", "eva",  "lukas", "nina",  "karl", "mila"};

std::string digits_of(std::string_view s) {
  std::string out;
  for (const char c : s) {
    if (std::isdigit(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

std::string compact_upper(std::string_view s) {
  std::string out;
  for (const char c : s) {
    if (c == ' ') continue;
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

int mod97(std::string_view alnum) {
  int rem = 0;
  for (const char c : alnum) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      rem = (rem * 10 + (c - '0')) % 97;
    } else {
      const int v = std::toupper(static_cast<unsigned char>(c)) - 'A' + 10;
      rem = (rem * 100 + v) % 97;
    }
  }
  return rem;
}

char luhn_check_digit(std::string_view payload) {
  int sum = 0;
  bool dbl = true;
  for (auto it = payload.rbegin(); it != payload.rend(); ++it) {
    int d = *it - '0';
    if (dbl) {
      d *= 2;
      if (d > 9) d -= 9;
    }
    sum += d;
    dbl = !dbl;
  }
  return static_cast<char>('0' + (10 - sum % 10) % 10);
}

// Copies the separator layout of `shape` onto a new digit string.
std::string reshape(std::string_view shape, std::string_view digits) {
  std::string out;
  std::size_t k = 0;
  for (const char c : shape) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      out.push_back(k < digits.size() ? digits[k++] : '0');
    } else {
      out.push_back(c);
    }
  }
  while (k < digits.size()) out.push_back(digits[k++]);
  return out;
}

std::string random_digits(Rng& rng, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<char>('0' + rng.below(10)));
  return out;
}

Checksum checksum_from_string(std::string_view s) {
  if (s.empty() || s == "none") return Checksum::None;
  if (s == "luhn") return Checksum::Luhn;
  if (s == "mod97") return Checksum::Mod97;
  throw ValidationError("unknown checksum '" + std::string(s) + "' (expected none|luhn|mod97)");
}

bool looks_like_date_or_years(std::string_view m) {
  static const std::regex date(R"(\d{1,2}[./-]\d{1,2}[./-]\d{2,4})");
  static const std::regex years(R"([12]\d{3}\s?[-/]\s?[12]\d{3})");
  const std::string s(m);
  return std::regex_match(s, date) || std::regex_match(s, years);
}

bool checksum_ok(Checksum c, std::string_view value) {
  switch (c) {
    case Checksum::None:
      return true;
    case Checksum::Luhn:
      return luhn_valid(digits_of(value));
    case Checksum::Mod97:
      return mod97(digits_of(value)) == 1;
  }
  return true;
}

}  // namespace

std::string_view to_string(PiiKind k) {
  switch (k) {
    case PiiKind::Email:
      return "Email";
    case PiiKind::Phone:
      return "Phone";
    case PiiKind::Iban:
      return "Iban";
    case PiiKind::CreditCard:
      return "CreditCard";
    case PiiKind::NationalId:
      return "NationalId";
  }
  return "Email";
}

bool luhn_valid(std::string_view digits) {
  if (digits.size() < 2) return false;
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    return false;
  }
  return luhn_check_digit(digits.substr(0, digits.size() - 1)) == digits.back();
}

bool iban_valid(std::string_view iban) {
  const auto s = compact_upper(iban);
  if (s.size() < 15 || s.size() > 34) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) || !std::isalpha(static_cast<unsigned char>(s[1]))) return false;
  if (!std::isdigit(static_cast<unsigned char>(s[2])) || !std::isdigit(static_cast<unsigned char>(s[3]))) return false;
  for (const char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c))) return false;
  }
  return mod97(s.substr(4) + s.substr(0, 4)) == 1;
}

void PiiRules::load_national_ids(const std::filesystem::path& path) {
  for (const auto& line : read_list_file(path)) {
    const auto fields = split(line, '\t');
    if (fields.size() < 2) throw ValidationError("national-id rule needs name<TAB>regex: " + line);
    NationalIdRule rule;
    rule.name = trim(fields[0]);
    rule.pattern = fields[1];
    if (fields.size() > 2) rule.checksum = checksum_from_string(trim(fields[2]));
    if (fields.size() > 3) rule.reserved_prefix = trim(fields[3]);
    try {
      std::regex test(rule.pattern);
    } catch (const std::regex_error& e) {
      throw ValidationError("invalid national-id regex for '" + rule.name + "': " + e.what());
    }
    national_ids.push_back(std::move(rule));
  }
}

std::string synthetic_value(PiiKind kind, std::string_view original, std::uint64_t seed, const NationalIdRule* rule) {
  std::string key(to_string(kind));
  key.push_back('\0');
  key.append(original);
  Rng rng(hash_combine(seed, fnv1a64(key)));

  switch (kind) {
    case PiiKind::Email: {
      std::string out(kNames[rng.below(kNames.size())]);
      out.push_back('.');
      static constexpr std::string_view alnum = "abcdefghijklmnopqrstuvwxyz0123456789";
      for (int i = 0; i < 5; ++i) out.push_back(alnum[rng.below(alnum.size())]);
      out += "@example";
      out += kSyntheticEmailTld;
      return out;
    }
    case PiiKind::Phone: {
      return "+1 555 01" + random_digits(rng, 2);
    }
    case PiiKind::Iban: {
      const auto compact = compact_upper(original);
      const auto bban_len = compact.size() > 4 ? compact.size() - 4 : 18;
      const auto bban = random_digits(rng, bban_len);
      const int check = 98 - mod97(bban + std::string(kSyntheticIbanCountry) + "00");
      std::string iban(kSyntheticIbanCountry);
      iban.push_back(static_cast<char>('0' + check / 10));
      iban.push_back(static_cast<char>('0' + check % 10));
      iban += bban;
      if (original.find(' ') == std::string_view::npos) return iban;
      std::string grouped;
      for (std::size_t i = 0; i < iban.size(); ++i) {
        if (i != 0 && i % 4 == 0) grouped.push_back(' ');
        grouped.push_back(iban[i]);
      }
      return grouped;
    }
    case PiiKind::CreditCard: {
      auto payload = std::string(kSyntheticCardPrefix) + random_digits(rng, 7);
      payload.push_back(luhn_check_digit(payload));
      char sep = 0;
      for (const char c : original) {
        if (c == ' ' || c == '-') {
          sep = c;
          break;
        }
      }
      if (sep == 0) return payload;
      std::string out;
      for (std::size_t i = 0; i < payload.size(); ++i) {
        if (i != 0 && i % 4 == 0) out.push_back(sep);
        out.push_back(payload[i]);
      }
      return out;
    }
    case PiiKind::NationalId: {
      const auto n = digits_of(original).size();
      std::string digits = random_digits(rng, n);
      const std::string prefix = rule ? rule->reserved_prefix : "000";
      for (std::size_t i = 0; i < prefix.size() && i < digits.size(); ++i) digits[i] = prefix[i];
      if (rule && rule->checksum == Checksum::Luhn && digits.size() >= 2) {
        digits.back() = luhn_check_digit(std::string_view(digits).substr(0, digits.size() - 1));
      } else if (rule && rule->checksum == Checksum::Mod97 && digits.size() >= 3) {
        // Last two digits are chosen so the whole number is 1 mod 97.
        const auto body = digits.substr(0, digits.size() - 2);
        const int rem = mod97(body + "00");
        const int check = (98 - rem) % 97;
        digits = body;
        digits.push_back(static_cast<char>('0' + check / 10));
        digits.push_back(static_cast<char>('0' + check % 10));
      }
      return reshape(original, digits);
    }
  }
  return std::string(original);
}

PiiAnonymizer::PiiAnonymizer(PiiRules rules) : rules_(std::move(rules)) {
  using std::regex;
  if (rules_.ibans) {
    patterns_.push_back({PiiKind::Iban, regex(R"(\b[A-Za-z]{2}[0-9]{2}(?: ?[A-Za-z0-9]{4}){2,7}(?: ?[A-Za-z0-9]{1,4})?\b)")});
  }
  if (rules_.credit_cards) {
    patterns_.push_back({PiiKind::CreditCard, regex(R"(\b(?:[0-9][ -]?){12,18}[0-9]\b)")});
  }
  if (rules_.emails) {
    patterns_.push_back({PiiKind::Email, regex(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,})")});
  }
  for (std::size_t i = 0; i < rules_.national_ids.size(); ++i) {
    patterns_.push_back({PiiKind::NationalId, regex(rules_.national_ids[i].pattern), static_cast<int>(i)});
  }
  if (rules_.phones) {
    patterns_.push_back(
        {PiiKind::Phone, regex(R"((?:\+[0-9]{1,3}[ .-]?)?(?:\([0-9]{1,4}\)[ .-]?)?[0-9]{2,4}(?:[ .-]?[0-9]{2,4}){1,4})")});
  }
}

PiiResult PiiAnonymizer::anonymize(const Document& doc) const {
  struct Match {
    std::size_t begin, end;
    PiiKind kind;
    const NationalIdRule* rule;
    bool synthetic;
  };
  std::vector<Match> claimed;
  auto overlaps = [&](std::size_t b, std::size_t e) {
    return std::any_of(claimed.begin(), claimed.end(), [&](const Match& m) { return b < m.end && m.begin < e; });
  };
  auto word_char = [&](std::size_t pos) {
    const auto c = static_cast<unsigned char>(doc.text[pos]);
    return std::isalnum(c) || c >= 0x80;
  };

  for (const auto& p : patterns_) {
    const NationalIdRule* rule = p.rule_index >= 0 ? &rules_.national_ids[static_cast<std::size_t>(p.rule_index)] : nullptr;
    for (auto it = std::sregex_iterator(doc.text.begin(), doc.text.end(), p.re); it != std::sregex_iterator(); ++it) {
      const auto b = static_cast<std::size_t>(it->position(0));
      const auto e = b + static_cast<std::size_t>(it->length(0));
      const std::string_view value(doc.text.data() + b, e - b);
      if (overlaps(b, e)) continue;
      bool synthetic = false;
      switch (p.kind) {
        case PiiKind::Iban:
          // An IBAN-shaped span with a bad checksum stays verbatim and keeps
          // its digit groups from being read as a phone or card number.
          synthetic = !iban_valid(value) || compact_upper(value).substr(0, 2) == kSyntheticIbanCountry;
          break;
        case PiiKind::CreditCard: {
          const auto d = digits_of(value);
          if (d.size() < 13 || d.size() > 19 || !luhn_valid(d)) continue;
          synthetic = d.rfind(kSyntheticCardPrefix, 0) == 0;
          break;
        }
        case PiiKind::Email: {
          const auto at = value.rfind('@');
          const auto domain = value.substr(at + 1);
          synthetic = domain.size() >= kSyntheticEmailTld.size() &&
                      domain.substr(domain.size() - kSyntheticEmailTld.size()) == kSyntheticEmailTld;
          break;
        }
        case PiiKind::Phone: {
          if ((b > 0 && word_char(b - 1)) || (e < doc.text.size() && word_char(e))) continue;
          const auto d = digits_of(value);
          if (d.size() < 7 || d.size() > 15 || looks_like_date_or_years(value)) continue;
          synthetic = d.size() == kSyntheticPhoneDigits.size() + 2 && d.rfind(kSyntheticPhoneDigits, 0) == 0;
          break;
        }
        case PiiKind::NationalId: {
          if (!checksum_ok(rule->checksum, value)) continue;
          synthetic = !rule->reserved_prefix.empty() && digits_of(value).rfind(rule->reserved_prefix, 0) == 0;
          break;
        }
      }
      // Spans left verbatim still claim their range so no later pattern
      // re-matches a piece of them.
      claimed.push_back({b, e, p.kind, rule, synthetic});
    }
  }

  std::sort(claimed.begin(), claimed.end(), [](const Match& a, const Match& b) { return a.begin < b.begin; });
  PiiResult result{doc, {}};
  std::string out;
  out.reserve(doc.text.size());
  std::size_t cursor = 0;
  for (const auto& m : claimed) {
    if (m.synthetic) continue;
    out.append(doc.text, cursor, m.begin - cursor);
    const auto repl =
        synthetic_value(m.kind, std::string_view(doc.text).substr(m.begin, m.end - m.begin), rules_.seed, m.rule);
    result.replacements.push_back({m.kind, out.size(), out.size() + repl.size()});
    out += repl;
    cursor = m.end;
  }
  if (result.replacements.empty()) return result;
  out.append(doc.text, cursor, std::string::npos);
  result.doc.text = std::move(out);
  return result;
}

PiiResult anonymize_pii(const Document& doc, const PiiRules& rules) { return PiiAnonymizer(rules).anonymize(doc); }

}  // namespace corpuskit
