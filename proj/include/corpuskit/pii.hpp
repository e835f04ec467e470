#pragma once

#include <cstdint>
#include <filesystem>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "corpuskit/document.hpp"

namespace corpuskit {

enum class PiiKind { Email, Phone, Iban, CreditCard, NationalId };
std::string_view to_string(PiiKind k);

enum class Checksum { None, Luhn, Mod97 };

bool luhn_valid(std::string_view digits);
// ISO 13616 check: rearranged alphanumeric value mod 97 == 1.
bool iban_valid(std::string_view iban);

// A jurisdiction-specific identifier supplied by configuration.
struct NationalIdRule {
  std::string name;
  std::string pattern;  // ECMAScript regex
  Checksum checksum = Checksum::None;
  // Synthetic values start with these digits; matches that already carry
  // the prefix are treated as synthetic and left alone.
  std::string reserved_prefix = "000";
};

struct PiiRules {
  std::uint64_t seed = 0;
  bool emails = true;
  bool phones = true;
  bool ibans = true;
  bool credit_cards = true;
  std::vector<NationalIdRule> national_ids;

  // Lines of `name<TAB>regex<TAB>checksum[<TAB>reserved_prefix]`.
  void load_national_ids(const std::filesystem::path& path);
};

struct PiiReplacement {
  PiiKind kind = PiiKind::Email;
  std::size_t begin = 0;  // byte span in the anonymized text
  std::size_t end = 0;
};

struct PiiResult {
  Document doc;
  std::vector<PiiReplacement> replacements;
};

// Synthetic value for one original; a pure function of (kind, value, seed).
std::string synthetic_value(PiiKind kind, std::string_view original, std::uint64_t seed,
                            const NationalIdRule* rule = nullptr);

class PiiAnonymizer {
 public:
  explicit PiiAnonymizer(PiiRules rules);

  PiiResult anonymize(const Document& doc) const;
  const PiiRules& rules() const { return rules_; }

 private:
  struct Pattern {
    PiiKind kind;
    std::regex re;
    int rule_index = -1;  // into rules_.national_ids
  };

  PiiRules rules_;
  std::vector<Pattern> patterns_;
};

PiiResult anonymize_pii(const Document& doc, const PiiRules& rules);

}  // namespace corpuskit
