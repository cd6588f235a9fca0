// swapmin: word-order swap-distance analysis from treebanks or counts tables.
//
//   swapmin extract       --treebank-dir DIR --output counts.tsv
//   swapmin measure       --counts counts.tsv --taxonomy languoids.csv --output metrics.csv
//   swapmin test-families --metrics metrics.csv --output families.csv
//   swapmin stratified    --metrics metrics.csv --subset ndo --output ci.json
//   swapmin report        --metrics metrics.csv --output-dir figures/
//
// Exit status: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "swapmin/error.hpp"
#include "swapmin/pipeline.hpp"

namespace fs = std::filesystem;
using namespace swapmin;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

bool quiet = false;

void log_line(const std::string& msg) {
  if (!quiet) std::cerr << "swapmin: " << msg << '\n';
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

// "-" writes to standard output.
void write_output(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path == "-") {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  body(out);
  out.flush();
  if (!out) throw DataError("error writing " + path);
}

void write_text(const std::string& path, const std::string& text) {
  write_output(path, [&](std::ostream& out) { out << text; });
}

std::vector<LanguageMetricsRow> load_metrics(const std::string& path) {
  auto in = open_input(path);
  return read_metrics_csv(in, path);
}

const std::map<std::string, AnnotationStyle> kStyles = {{"ud", AnnotationStyle::UD},
                                                       {"sud", AnnotationStyle::SUD}};
const std::map<std::string, DependentPolicy> kPolicies = {{"all-pairs", DependentPolicy::AllPairs},
                                                         {"nearest", DependentPolicy::Nearest}};
const std::map<std::string, Subset> kSubsets = {{"all", Subset::All}, {"ndo", Subset::NDO}};
const std::map<std::string, ZeroMethod> kZeros = {{"wilcox", ZeroMethod::Wilcox},
                                                 {"pratt", ZeroMethod::Pratt}};
const std::map<std::string, LargeSampleApprox> kApprox = {
    {"saddlepoint", LargeSampleApprox::Saddlepoint}, {"normal", LargeSampleApprox::Normal}};

struct Settings {
  unsigned threads = 1;

  // extract
  std::string treebank_dir;
  std::string style = "ud";
  std::string policy = "all-pairs";
  bool strict = true;

  // measure
  std::string counts, taxonomy, aliases, overrides;
  double rho0 = 0.5;
  TaxonomyOptions taxonomy_options;
  std::vector<std::string> pseudo_families;

  // tests
  std::string metrics;
  std::size_t n_resamples = 100'000;
  std::size_t n_samples = 1'000'000;
  double confidence = 0.99;
  std::uint64_t seed = 1;
  std::string subset = "all";
  std::string zeros = "wilcox";
  std::string approx = "saddlepoint";

  // outputs
  std::string output = "-";
  std::string json, exclusions, alpha_sweep, output_dir;
};

void add_test_options(CLI::App* cmd, Settings& s) {
  cmd->add_option("--seed", s.seed, "Master seed of the counter-based generator")
      ->capture_default_str();
  cmd->add_option("--zeros", s.zeros, "Zero-difference handling")
      ->check(CLI::IsMember(kZeros))
      ->capture_default_str();
  cmd->add_option("--approx", s.approx, "Large-sample approximation of the signed-rank null")
      ->check(CLI::IsMember(kApprox))
      ->capture_default_str();
}

int run_extract(const Settings& s) {
  ExtractOptions opts;
  opts.treebank_dir = s.treebank_dir;
  opts.style = kStyles.at(s.style);
  opts.policy = kPolicies.at(s.policy);
  opts.mode = s.strict ? ParseMode::Strict : ParseMode::Lenient;
  opts.threads = s.threads;
  const auto res = extract_counts(opts, log_line);
  write_output(s.output, [&](std::ostream& out) { write_counts_table(out, res.counts); });
  if (!s.exclusions.empty()) write_text(s.exclusions, res.exclusions.to_json() + "\n");
  log_line(std::to_string(res.files) + " files, " + std::to_string(res.counts.size()) +
           " languages");
  return 0;
}

int run_measure(Settings s) {
  if (!s.pseudo_families.empty())
    s.taxonomy_options.pseudo_families = {s.pseudo_families.begin(), s.pseudo_families.end()};
  auto tax_in = open_input(s.taxonomy);
  const auto taxonomy = load_taxonomy(tax_in, s.taxonomy_options, s.taxonomy);
  auto counts_in = open_input(s.counts);
  const auto counts = ingest_counts_table(counts_in, s.counts);

  MeasureOptions opts;
  opts.rho0 = s.rho0;
  if (!s.aliases.empty()) {
    auto in = open_input(s.aliases);
    opts.aliases = load_aliases(in, s.aliases);
  }
  if (!s.overrides.empty()) {
    auto in = open_input(s.overrides);
    opts.overrides = load_dominant_overrides(in, s.overrides);
  }
  const auto res = measure(counts, taxonomy, opts, log_line);
  write_output(s.output, [&](std::ostream& out) { write_metrics_csv(out, res.rows); });
  if (!s.json.empty()) write_text(s.json, metrics_json(res, s.rho0));
  if (!s.exclusions.empty()) write_text(s.exclusions, res.exclusions.to_json() + "\n");
  log_line(std::to_string(res.rows.size()) + " languages retained, " +
           std::to_string(res.exclusions.entries.size()) + " excluded");
  return 0;
}

int run_test_families(const Settings& s) {
  MinPOptions opts;
  opts.n_resamples = s.n_resamples;
  opts.seed = s.seed;
  opts.threads = s.threads;
  opts.zeros = kZeros.at(s.zeros);
  opts.approx = kApprox.at(s.approx);
  const auto out = run_family_tests(load_metrics(s.metrics), opts);
  write_output(s.output, [&](std::ostream& o) { write_family_tests_csv(o, out); });
  if (!s.json.empty()) write_text(s.json, family_tests_json(out, opts));
  if (!s.alpha_sweep.empty())
    write_output(s.alpha_sweep, [&](std::ostream& o) { write_alpha_sweep_csv(o, out.sweep); });
  return 0;
}

int run_stratified_cmd(const Settings& s) {
  StratifiedOptions opts;
  opts.n_samples = s.n_samples;
  opts.confidence = s.confidence;
  opts.seed = s.seed;
  opts.threads = s.threads;
  opts.zeros = kZeros.at(s.zeros);
  opts.approx = kApprox.at(s.approx);
  const auto out = run_stratified(load_metrics(s.metrics), kSubsets.at(s.subset), opts);
  write_text(s.output, stratified_json(out, opts));
  return 0;
}

int run_report(const Settings& s) {
  const auto rows = load_metrics(s.metrics);
  std::error_code ec;
  fs::create_directories(s.output_dir, ec);
  if (ec) throw DataError("cannot create " + s.output_dir + ": " + ec.message());
  const fs::path dir = s.output_dir;
  write_output((dir / "scatter.csv").string(), [&](std::ostream& o) { write_scatter_csv(o, rows); });
  write_output((dir / "families.csv").string(),
               [&](std::ostream& o) { write_family_summary_csv(o, summarize_families(rows)); });
  write_output((dir / "ndo.csv").string(), [&](std::ostream& o) { write_ndo_csv(o, rows); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Swap distance minimization in subject, object and verb order"};
  app.set_config("--config", "", "TOML/INI file; sections named after subcommands");
  app.require_subcommand(1);
  Settings s;
  app.add_option("--threads", s.threads, "Worker threads")->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--quiet", quiet, "Suppress log lines on standard error");

  auto* extract = app.add_subcommand("extract", "Count S/O/V orders in a treebank directory");
  extract->add_option("--treebank-dir", s.treebank_dir, "Directory of *.conllu[.gz] files")
      ->required();
  extract->add_option("--style", s.style, "Annotation style")
      ->check(CLI::IsMember(kStyles))
      ->capture_default_str();
  extract->add_option("--dep-policy", s.policy, "Several subjects or objects under one verb")
      ->check(CLI::IsMember(kPolicies))
      ->capture_default_str();
  extract->add_flag("--strict,!--lenient", s.strict,
                    "Abort on malformed input (--lenient skips the sentence)");
  extract->add_option("--output,-o", s.output, "Counts TSV (- for stdout)")->capture_default_str();
  extract->add_option("--exclusions", s.exclusions, "JSON list of languages without triplets");

  auto* measure_cmd = app.add_subcommand("measure", "Per-language metrics joined to the taxonomy");
  measure_cmd->add_option("--counts", s.counts, "Counts TSV")->required();
  measure_cmd->add_option("--taxonomy", s.taxonomy, "Languoid CSV")->required();
  measure_cmd->add_option("--aliases", s.aliases, "Alias TSV local_id<TAB>glottocode");
  measure_cmd->add_option("--dominant-override", s.overrides,
                          "TSV language<TAB>dominant (order label or NDO)");
  measure_cmd->add_option("--rho0", s.rho0, "NDO threshold on p2/p1")->capture_default_str();
  auto& cols = s.taxonomy_options.columns;
  measure_cmd->add_option("--col-glottocode", cols.glottocode)->capture_default_str();
  measure_cmd->add_option("--col-name", cols.name)->capture_default_str();
  measure_cmd->add_option("--col-family", cols.family)->capture_default_str();
  measure_cmd->add_option("--col-macroareas", cols.macroareas)->capture_default_str();
  measure_cmd->add_option("--col-kind", cols.kind)->capture_default_str();
  measure_cmd->add_option("--col-language", cols.language)->capture_default_str();
  measure_cmd->add_option("--macroarea-separator", cols.macroarea_separator)
      ->capture_default_str();
  measure_cmd->add_option("--pseudo-family", s.pseudo_families,
                          "Family excluded as a pseudofamily (repeatable; replaces the default set)");
  measure_cmd->add_option("--output,-o", s.output, "Metrics CSV (- for stdout)")
      ->capture_default_str();
  measure_cmd->add_option("--json", s.json, "Metrics JSON");
  measure_cmd->add_option("--exclusions", s.exclusions, "Exclusion report JSON");

  auto* tests = app.add_subcommand("test-families", "Per-family tests with sd.minP adjustment");
  tests->add_option("--metrics", s.metrics, "Metrics CSV from measure")->required();
  tests->add_option("--n-resamples", s.n_resamples, "Monte Carlo resamples")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_test_options(tests, s);
  tests->add_option("--output,-o", s.output, "Family report CSV (- for stdout)")
      ->capture_default_str();
  tests->add_option("--json", s.json, "Family report JSON");
  tests->add_option("--alpha-sweep", s.alpha_sweep, "Families at or below each adjusted p");

  auto* strat = app.add_subcommand("stratified", "Confidence interval by stratified sampling");
  strat->add_option("--metrics", s.metrics, "Metrics CSV from measure")->required();
  strat->add_option("--subset", s.subset, "Languages entering the draws")
      ->check(CLI::IsMember(kSubsets))
      ->capture_default_str();
  strat->add_option("--n-samples", s.n_samples, "Number of draws")->capture_default_str();
  strat->add_option("--confidence", s.confidence, "Interval coverage")->capture_default_str();
  add_test_options(strat, s);
  strat->add_option("--output,-o", s.output, "Interval JSON (- for stdout)")->capture_default_str();

  auto* report = app.add_subcommand("report", "Figure-ready tables");
  report->add_option("--metrics", s.metrics, "Metrics CSV from measure")->required();
  report->add_option("--output-dir", s.output_dir, "Receives scatter.csv, families.csv, ndo.csv")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (extract->parsed()) return run_extract(s);
    if (measure_cmd->parsed()) return run_measure(s);
    if (tests->parsed()) return run_test_families(s);
    if (strat->parsed()) return run_stratified_cmd(s);
    if (report->parsed()) return run_report(s);
  } catch (const DataError& e) {
    std::cerr << "swapmin: error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "swapmin: usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "swapmin: error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}
