#pragma once

// Genealogical and areal metadata for languages: family lookup, pseudofamily
// exclusion, one-sample-per-language dedup and the typical macroarea of a
// family.

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace swapmin {

enum class LanguoidKind { Language, Dialect, Macrolanguage, Pseudo };

std::string_view to_string(LanguoidKind k) noexcept;
std::optional<LanguoidKind> parse_languoid_kind(std::string_view s) noexcept;

struct Languoid {
  std::string glottocode;
  std::string name;
  std::string family;  // own name for isolates and family roots
  std::set<std::string> macroareas;
  LanguoidKind kind = LanguoidKind::Language;
  // Glottocode of the language a dialect or macrolanguage sample stands
  // for; equals glottocode for plain languages. Dedup groups on this.
  std::string language;
  bool excluded = false;  // pseudofamily member
};

// Header names of the languoid CSV. Only `kind` and `language` may be
// absent from the file.
struct TaxonomyColumns {
  std::string glottocode = "glottocode";
  std::string name = "name";
  std::string family = "family";
  std::string macroareas = "macroareas";
  std::string kind = "kind";
  std::string language = "language";
  char macroarea_separator = ';';
};

struct TaxonomyOptions {
  TaxonomyColumns columns;
  // Families whose members are excluded in addition to rows of kind pseudo.
  std::set<std::string> pseudo_families = {"Sign Language", "Pidgin", "Artificial Language"};
};

class Taxonomy {
 public:
  void insert(Languoid l);  // throws DataError on duplicate glottocode

  const Languoid* find_glottocode(const std::string& code) const;
  // nullptr when the name is unknown or shared by several languoids.
  const Languoid* find_name(const std::string& name) const;

  std::size_t size() const noexcept { return by_code_.size(); }
  const std::map<std::string, Languoid>& entries() const noexcept { return by_code_; }

 private:
  std::map<std::string, Languoid> by_code_;
  std::unordered_map<std::string, std::vector<std::string>> by_name_;
};

Taxonomy load_taxonomy(std::istream& in, const TaxonomyOptions& options = {},
                       const std::string& source_name = "<taxonomy>");

// Alias TSV: "local_id<TAB>glottocode" per line; an optional header line
// starting with "local_id" is skipped.
using AliasMap = std::map<std::string, std::string>;
AliasMap load_aliases(std::istream& in, const std::string& source_name = "<aliases>");

struct Exclusion {
  std::string id;
  std::string reason;
};

struct ExclusionReport {
  std::vector<Exclusion> entries;
  void add(std::string id, std::string reason) {
    entries.push_back({std::move(id), std::move(reason)});
  }
  // JSON array of {"id", "reason"} objects.
  std::string to_json() const;
};

// Lookup order: glottocode, alias file, unique name. Throws DataError when
// none matches.
const Languoid& resolve_language(const std::string& id, const Taxonomy& table,
                                 const AliasMap& aliases = {});

// Non-throwing variant that records the failure.
const Languoid* resolve_language(const std::string& id, const Taxonomy& table,
                                 const AliasMap& aliases, ExclusionReport& report);

struct Sample {
  std::string id;
  Languoid languoid;
};

// Keeps one sample per Languoid::language. Preference: kind language, then
// dialect, then macrolanguage; ties go to the lexicographically smallest
// sample id. Removed samples are appended to `removed` when given. Output
// keeps input order.
std::vector<Sample> dedup_samples(const std::vector<Sample>& samples,
                                  ExclusionReport* removed = nullptr);

struct TypicalMacroarea {
  std::string macroarea;
  double rho = 0.0;
  bool tied = false;  // another macroarea reached the same rho
  std::map<std::string, double> all;
};

// rho(m) = (1/N) * sum over members in m of 1/a_i, a_i = number of
// macroareas of member i. Argmax with lexicographic tie-break. Throws
// DataError if the family is empty or any member has no macroarea.
TypicalMacroarea typical_macroarea(const std::vector<std::set<std::string>>& member_macroareas);

// "Eurasia - North America" style label for multi-area languages.
std::string hybrid_macroarea_label(const std::set<std::string>& macroareas);

}  // namespace swapmin
