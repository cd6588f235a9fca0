#pragma once

// The analysis pipeline behind the command-line tool: treebank extraction,
// per-language metrics, family tests, stratified intervals and figure-ready
// tables. Every step is callable in-process; the tool only adds file I/O.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "swapmin/family_tests.hpp"
#include "swapmin/permutohedron.hpp"
#include "swapmin/taxonomy.hpp"
#include "swapmin/treebank.hpp"

namespace swapmin {

inline constexpr int kSchemaVersion = 1;

// Receives one human-readable line per exclusion or skipped input.
using Logger = std::function<void(const std::string&)>;

// ---- extract ---------------------------------------------------------------

struct ExtractOptions {
  std::filesystem::path treebank_dir;
  AnnotationStyle style = AnnotationStyle::UD;
  DependentPolicy policy = DependentPolicy::AllPairs;
  ParseMode mode = ParseMode::Strict;
  unsigned threads = 1;
};

struct ExtractResult {
  std::vector<TripletCounts> counts;  // sorted by language, zero totals omitted
  ExclusionReport exclusions;
  std::size_t files = 0;
  std::size_t skipped_sentences = 0;
};

// Language code of a treebank file: the file name up to the first '_'
// ("cy_ccg-ud-train.conllu" -> "cy"), or the name without its extension.
std::string language_of_treebank_file(const std::filesystem::path& file);

// Recursively collects *.conllu and *.conllu.gz files, merges all files of
// a language and counts triplet orders. Throws DataError when the directory
// is unreadable or holds no matching file.
ExtractResult extract_counts(const ExtractOptions& options, const Logger& log = {});

// ---- measure ---------------------------------------------------------------

struct LanguageMetricsRow {
  std::string language;  // sample id from the counts table
  std::string glottocode;
  std::string name;
  std::string family;
  std::set<std::string> macroareas;
  Counts counts{};
  std::uint64_t total = 0;
  double mean_distance = 0.0;  // <d>
  double baseline = 0.0;       // <d>_r
  double simpson = 0.0;
  std::optional<Order> dominant;  // nullopt: no dominant order (NDO)
  double rho = 0.0;
  bool dominant_overridden = false;

  bool is_ndo() const noexcept { return !dominant.has_value(); }
  double delta() const noexcept { return mean_distance - baseline; }
  bool below_control() const noexcept { return mean_distance < baseline; }
};

// Externally supplied dominant orders, keyed by sample id or glottocode.
// Values are order labels or "NDO".
using DominantOverrides = std::map<std::string, std::optional<Order>>;

// TSV "language<TAB>dominant" with an optional header line.
DominantOverrides load_dominant_overrides(std::istream& in,
                                          const std::string& source_name = "<overrides>");

struct MeasureOptions {
  double rho0 = 0.5;
  AliasMap aliases;
  DominantOverrides overrides;
};

struct MeasureResult {
  std::vector<LanguageMetricsRow> rows;  // counts-table order
  ExclusionReport exclusions;
};

// Joins counts to the taxonomy (alias resolution, pseudofamily exclusion,
// one sample per language) and computes every per-language metric.
// Unresolvable ids are reported, never fatal.
MeasureResult measure(const std::vector<TripletCounts>& counts, const Taxonomy& taxonomy,
                      const MeasureOptions& options = {}, const Logger& log = {});

void write_metrics_csv(std::ostream& out, const std::vector<LanguageMetricsRow>& rows);
std::vector<LanguageMetricsRow> read_metrics_csv(std::istream& in,
                                                 const std::string& source_name = "<metrics>");
std::string metrics_json(const MeasureResult& result, double rho0);

// ---- family tests ----------------------------------------------------------

// Families sorted by name, members in row order.
std::vector<FamilyDeltas> group_by_family(const std::vector<LanguageMetricsRow>& rows);

struct FamilyTestsOutput {
  MinPResult minp;
  std::vector<AlphaLevel> sweep;
  std::map<std::string, std::size_t> family_sizes;
};

FamilyTestsOutput run_family_tests(const std::vector<LanguageMetricsRow>& rows,
                                   const MinPOptions& options);

void write_family_tests_csv(std::ostream& out, const FamilyTestsOutput& result);
void write_alpha_sweep_csv(std::ostream& out, const std::vector<AlphaLevel>& sweep);
std::string family_tests_json(const FamilyTestsOutput& result, const MinPOptions& options);

// ---- stratified ------------------------------------------------------------

enum class Subset { All, NDO };

std::string_view to_string(Subset s) noexcept;

struct StratifiedOutput {
  Subset subset = Subset::All;
  std::size_t n_languages = 0;
  StratifiedCI ci;
};

// Throws DataError naming the filter when the subset is empty.
StratifiedOutput run_stratified(const std::vector<LanguageMetricsRow>& rows, Subset subset,
                                const StratifiedOptions& options);

std::string stratified_json(const StratifiedOutput& out, const StratifiedOptions& options);

// ---- report ----------------------------------------------------------------

struct FamilySummary {
  std::string family;
  std::size_t n_languages = 0;
  std::string typical_macroarea;  // "unknown" when no member has a macroarea
  double rho_percent = 0.0;
  bool tied = false;
  std::size_t n_ndo = 0;
  std::size_t n_below_control = 0;
};

std::vector<FamilySummary> summarize_families(const std::vector<LanguageMetricsRow>& rows);

void write_scatter_csv(std::ostream& out, const std::vector<LanguageMetricsRow>& rows);
void write_family_summary_csv(std::ostream& out, const std::vector<FamilySummary>& families);
void write_ndo_csv(std::ostream& out, const std::vector<LanguageMetricsRow>& rows);

}  // namespace swapmin
