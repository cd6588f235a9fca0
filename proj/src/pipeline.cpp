#include "swapmin/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <json.hpp>
#include <mutex>
#include <ostream>

#include "csv.hpp"
#include "parallel.hpp"
#include "swapmin/error.hpp"

namespace swapmin {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void emit(const Logger& log, const std::string& msg) {
  if (log) log(msg);
}

// Shortest text that reads back to the same double.
std::string fmt(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string join(const std::set<std::string>& items, std::string_view sep) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

std::string dominant_label(const std::optional<Order>& d) {
  return d ? std::string(to_string(*d)) : std::string("NDO");
}

bool has_suffix(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_treebank_file(const fs::path& p) {
  const auto name = p.filename().string();
  return has_suffix(name, ".conllu") || has_suffix(name, ".conllu.gz");
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

// ---- extract ---------------------------------------------------------------

std::string language_of_treebank_file(const fs::path& file) {
  std::string name = file.filename().string();
  for (std::string_view ext : {".gz", ".conllu"})
    if (has_suffix(name, ext)) name.resize(name.size() - ext.size());
  const auto cut = name.find('_');
  if (cut != std::string::npos && cut > 0) name.resize(cut);
  return name;
}

ExtractResult extract_counts(const ExtractOptions& options, const Logger& log) {
  std::error_code ec;
  if (!fs::is_directory(options.treebank_dir, ec))
    throw DataError("unreadable path: " + options.treebank_dir.string());

  std::vector<fs::path> files;
  fs::recursive_directory_iterator it(options.treebank_dir, ec), end;
  if (ec) throw DataError("unreadable path: " + options.treebank_dir.string() + ": " + ec.message());
  for (; it != end; it.increment(ec)) {
    if (ec) throw DataError("unreadable path: " + options.treebank_dir.string() + ": " + ec.message());
    if (it->is_regular_file() && is_treebank_file(it->path())) files.push_back(it->path());
  }
  if (files.empty()) throw DataError("no files matched in " + options.treebank_dir.string());
  std::sort(files.begin(), files.end());

  std::mutex log_mutex;
  auto locked_log = [&](const std::string& msg) {
    std::lock_guard lock(log_mutex);
    emit(log, msg);
  };

  std::vector<TripletCounts> per_file(files.size());
  std::vector<std::size_t> skipped(files.size(), 0);
  detail::parallel_chunks(files.size(), options.threads,
                          [&](std::size_t begin, std::size_t stop, unsigned) {
    for (std::size_t i = begin; i < stop; ++i) {
      const auto path = files[i].string();
      ConlluReader reader(make_file_source(path), path, options.mode,
                          [&](const std::string& msg) { locked_log("skipped sentence: " + msg); });
      per_file[i] = count_orders(reader, options.style, language_of_treebank_file(files[i]),
                                 options.policy);
      skipped[i] = reader.skipped_sentences();
    }
  });

  std::map<std::string, TripletCounts> merged;
  for (const auto& c : per_file) {
    auto [pos, fresh] = merged.try_emplace(c.language, TripletCounts{c.language, {}});
    pos->second += c;
  }

  ExtractResult result;
  result.files = files.size();
  for (auto n : skipped) result.skipped_sentences += n;
  for (auto& [lang, c] : merged) {
    if (c.total() == 0) {
      result.exclusions.add(lang, "no subject-object-verb triplet");
      emit(log, "excluded " + lang + ": no subject-object-verb triplet");
      continue;
    }
    result.counts.push_back(std::move(c));
  }
  return result;
}

// ---- measure ---------------------------------------------------------------

DominantOverrides load_dominant_overrides(std::istream& in, const std::string& source_name) {
  DominantOverrides out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line, '\t');
    if (line_no == 1 && fields[0] == "language") continue;
    if (fields.size() != 2) throw ParseError(source_name, line_no, "expected 2 columns");
    std::optional<Order> value;
    if (fields[1] != "NDO") {
      value = parse_order(fields[1]);
      if (!value) throw ParseError(source_name, line_no, "unknown dominant order '" + fields[1] + "'");
    }
    if (!out.emplace(fields[0], value).second)
      throw ParseError(source_name, line_no, "duplicate language '" + fields[0] + "'");
  }
  return out;
}

MeasureResult measure(const std::vector<TripletCounts>& counts, const Taxonomy& taxonomy,
                      const MeasureOptions& options, const Logger& log) {
  if (!(options.rho0 > 0.0 && options.rho0 <= 1.0))
    throw std::invalid_argument("rho0 must lie in (0, 1]");

  MeasureResult result;
  auto& report = result.exclusions;
  std::vector<Sample> samples;
  std::map<std::string, const TripletCounts*> by_id;
  for (const auto& c : counts) {
    if (c.total() == 0) {
      report.add(c.language, "no subject-object-verb triplet");
      continue;
    }
    const Languoid* l = resolve_language(c.language, taxonomy, options.aliases, report);
    if (l == nullptr) continue;
    if (l->excluded) {
      report.add(c.language, "pseudofamily " + l->family);
      continue;
    }
    samples.push_back({c.language, *l});
    by_id[c.language] = &c;
  }
  const auto kept = dedup_samples(samples, &report);

  for (const auto& s : kept) {
    const auto& c = *by_id.at(s.id);
    const auto dist = OrderDistribution::from_counts(c.counts);
    LanguageMetricsRow row;
    row.language = s.id;
    row.glottocode = s.languoid.glottocode;
    row.name = s.languoid.name;
    row.family = s.languoid.family;
    row.macroareas = s.languoid.macroareas;
    row.counts = c.counts;
    row.total = c.total();
    row.mean_distance = mean_swap_distance(dist);
    row.baseline = random_baseline(dist);
    row.simpson = simpson_index(dist);
    const auto cls = classify_dominant_order(dist, options.rho0);
    row.dominant = cls.dominant;
    row.rho = cls.rho;
    auto ov = options.overrides.find(s.id);
    if (ov == options.overrides.end()) ov = options.overrides.find(row.glottocode);
    if (ov != options.overrides.end()) {
      row.dominant = ov->second;
      row.dominant_overridden = true;
    }
    result.rows.push_back(std::move(row));
  }
  for (const auto& e : report.entries) emit(log, "excluded " + e.id + ": " + e.reason);
  return result;
}

namespace {

constexpr std::string_view kMetricsHeader =
    "language,glottocode,name,family,macroareas,total,SOV,SVO,VSO,VOS,OVS,OSV,"
    "mean_distance,baseline,simpson,dominant,rho,dominant_source";

template <typename T>
T parse_number(const std::string& field, const std::string& source, std::size_t line) {
  T value{};
  auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size())
    throw ParseError(source, line, "bad number '" + field + "'");
  return value;
}

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<LanguageMetricsRow>& rows) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    out << detail::csv_escape(r.language) << ',' << detail::csv_escape(r.glottocode) << ','
        << detail::csv_escape(r.name) << ',' << detail::csv_escape(r.family) << ','
        << detail::csv_escape(join(r.macroareas, ";")) << ',' << r.total;
    for (auto n : r.counts) out << ',' << n;
    out << ',' << fmt(r.mean_distance) << ',' << fmt(r.baseline) << ',' << fmt(r.simpson) << ','
        << dominant_label(r.dominant) << ',' << fmt(r.rho) << ','
        << (r.dominant_overridden ? "override" : "counts") << '\n';
  }
}

std::vector<LanguageMetricsRow> read_metrics_csv(std::istream& in, const std::string& source_name) {
  std::vector<LanguageMetricsRow> rows;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(source_name, 1, "empty metrics table");
  ++line_no;
  strip_cr(line);
  if (line != kMetricsHeader) throw ParseError(source_name, 1, "unexpected metrics header");
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 18) throw ParseError(source_name, line_no, "expected 18 columns");
    LanguageMetricsRow r;
    r.language = f[0];
    r.glottocode = f[1];
    r.name = f[2];
    r.family = f[3];
    std::string_view areas = f[4];
    while (!areas.empty()) {
      const auto cut = areas.find(';');
      r.macroareas.emplace(areas.substr(0, cut));
      if (cut == std::string_view::npos) break;
      areas.remove_prefix(cut + 1);
    }
    r.total = parse_number<std::uint64_t>(f[5], source_name, line_no);
    for (std::size_t i = 0; i < 6; ++i)
      r.counts[i] = parse_number<std::uint64_t>(f[6 + i], source_name, line_no);
    r.mean_distance = parse_number<double>(f[12], source_name, line_no);
    r.baseline = parse_number<double>(f[13], source_name, line_no);
    r.simpson = parse_number<double>(f[14], source_name, line_no);
    if (f[15] != "NDO") {
      r.dominant = parse_order(f[15]);
      if (!r.dominant) throw ParseError(source_name, line_no, "unknown dominant order '" + f[15] + "'");
    }
    r.rho = parse_number<double>(f[16], source_name, line_no);
    if (f[17] != "counts" && f[17] != "override")
      throw ParseError(source_name, line_no, "unknown dominant_source '" + f[17] + "'");
    r.dominant_overridden = f[17] == "override";
    if (r.family.empty()) throw ParseError(source_name, line_no, "empty family");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string metrics_json(const MeasureResult& result, double rho0) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["rho0"] = rho0;
  json langs = json::array();
  for (const auto& r : result.rows) {
    json counts;
    for (Order o : kAllOrders) counts[std::string(to_string(o))] = r.counts[index_of(o)];
    langs.push_back({{"language", r.language},
                     {"glottocode", r.glottocode},
                     {"name", r.name},
                     {"family", r.family},
                     {"macroareas", r.macroareas},
                     {"total", r.total},
                     {"counts", counts},
                     {"mean_distance", r.mean_distance},
                     {"baseline", r.baseline},
                     {"simpson", r.simpson},
                     {"dominant", dominant_label(r.dominant)},
                     {"rho", r.rho},
                     {"dominant_source", r.dominant_overridden ? "override" : "counts"}});
  }
  doc["languages"] = std::move(langs);
  doc["exclusions"] = json::parse(result.exclusions.to_json());
  return doc.dump(2) + "\n";
}

// ---- family tests ----------------------------------------------------------

std::vector<FamilyDeltas> group_by_family(const std::vector<LanguageMetricsRow>& rows) {
  std::map<std::string, FamilyDeltas> groups;
  for (const auto& r : rows) {
    auto& g = groups[r.family];
    g.family = r.family;
    g.deltas.push_back(r.delta());
  }
  std::vector<FamilyDeltas> out;
  out.reserve(groups.size());
  for (auto& [name, g] : groups) out.push_back(std::move(g));
  return out;
}

FamilyTestsOutput run_family_tests(const std::vector<LanguageMetricsRow>& rows,
                                   const MinPOptions& options) {
  const auto families = group_by_family(rows);
  FamilyTestsOutput out;
  out.minp = adjust_sd_minp(families, options);
  out.sweep = alpha_sweep(out.minp.reports);
  for (const auto& f : families) out.family_sizes[f.family] = f.deltas.size();
  return out;
}

void write_family_tests_csv(std::ostream& out, const FamilyTestsOutput& result) {
  out << "family,n_languages,raw_p,raw_log_p,mc_estimate,adjusted_p,status\n";
  for (const auto& r : result.minp.reports)
    out << detail::csv_escape(r.family) << ',' << r.n_languages << ',' << fmt(r.raw_p) << ','
        << fmt(r.raw_log_p) << ',' << fmt(r.mc_estimate) << ',' << fmt(r.adjusted_p) << ",tested\n";
  for (const auto& name : result.minp.untestable)
    out << detail::csv_escape(name) << ',' << result.family_sizes.at(name) << ",,,,,untestable\n";
}

void write_alpha_sweep_csv(std::ostream& out, const std::vector<AlphaLevel>& sweep) {
  out << "alpha,families_at_or_below,families_at_level\n";
  for (const auto& level : sweep) {
    std::string members;
    for (const auto& [family, n] : level.families_at_level) {
      if (!members.empty()) members += ';';
      members += family + ':' + std::to_string(n);
    }
    out << fmt(level.alpha) << ',' << level.families_at_or_below << ','
        << detail::csv_escape(members) << '\n';
  }
}

std::string family_tests_json(const FamilyTestsOutput& result, const MinPOptions& options) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["n_resamples"] = options.n_resamples;
  doc["seed"] = options.seed;
  doc["zero_method"] = to_string(options.zeros);
  doc["large_sample_approx"] = to_string(options.approx);
  json fams = json::array();
  for (const auto& r : result.minp.reports)
    fams.push_back({{"family", r.family},
                    {"n_languages", r.n_languages},
                    {"raw_p", r.raw_p},
                    {"raw_log_p", r.raw_log_p},
                    {"mc_estimate", r.mc_estimate},
                    {"adjusted_p", r.adjusted_p}});
  doc["families"] = std::move(fams);
  json untestable = json::array();
  for (const auto& name : result.minp.untestable)
    untestable.push_back({{"family", name}, {"n_languages", result.family_sizes.at(name)}});
  doc["untestable"] = std::move(untestable);
  json sweep = json::array();
  for (const auto& level : result.sweep) {
    json members = json::array();
    for (const auto& [family, n] : level.families_at_level)
      members.push_back({{"family", family}, {"n_languages", n}});
    sweep.push_back({{"alpha", level.alpha},
                     {"families_at_or_below", level.families_at_or_below},
                     {"families_at_level", std::move(members)}});
  }
  doc["alpha_sweep"] = std::move(sweep);
  return doc.dump(2) + "\n";
}

// ---- stratified ------------------------------------------------------------

std::string_view to_string(Subset s) noexcept { return s == Subset::All ? "all" : "ndo"; }

StratifiedOutput run_stratified(const std::vector<LanguageMetricsRow>& rows, Subset subset,
                                const StratifiedOptions& options) {
  std::vector<LanguageMetricsRow> chosen;
  for (const auto& r : rows)
    if (subset == Subset::All || r.is_ndo()) chosen.push_back(r);
  if (chosen.empty())
    throw DataError(subset == Subset::NDO
                        ? "subset 'ndo' is empty: no language lacks a dominant order"
                        : "subset 'all' is empty: no language in the metrics table");
  StratifiedOutput out;
  out.subset = subset;
  out.n_languages = chosen.size();
  out.ci = stratified_ci(group_by_family(chosen), options);
  return out;
}

std::string stratified_json(const StratifiedOutput& out, const StratifiedOptions& options) {
  const auto& ci = out.ci;
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["subset"] = to_string(out.subset);
  doc["n_languages"] = out.n_languages;
  doc["n_families"] = ci.n_families;
  doc["n_samples"] = ci.n_samples;
  doc["confidence"] = ci.confidence;
  doc["seed"] = ci.seed;
  doc["zero_method"] = to_string(options.zeros);
  doc["large_sample_approx"] = to_string(options.approx);
  doc["lower"] = ci.lower;
  doc["upper"] = ci.upper;
  doc["median"] = ci.median;
  doc["log_lower"] = ci.log_lower;
  doc["log_upper"] = ci.log_upper;
  doc["n_degenerate"] = ci.n_degenerate;
  return doc.dump(2) + "\n";
}

// ---- report ----------------------------------------------------------------

std::vector<FamilySummary> summarize_families(const std::vector<LanguageMetricsRow>& rows) {
  std::map<std::string, std::vector<const LanguageMetricsRow*>> groups;
  for (const auto& r : rows) groups[r.family].push_back(&r);
  std::vector<FamilySummary> out;
  for (const auto& [family, members] : groups) {
    FamilySummary s;
    s.family = family;
    s.n_languages = members.size();
    std::vector<std::set<std::string>> areas;
    for (const auto* m : members) {
      if (!m->macroareas.empty()) areas.push_back(m->macroareas);
      if (m->is_ndo()) ++s.n_ndo;
      if (m->below_control()) ++s.n_below_control;
    }
    if (areas.empty()) {
      s.typical_macroarea = "unknown";
    } else {
      const auto t = typical_macroarea(areas);
      s.typical_macroarea = t.macroarea;
      s.rho_percent = 100.0 * t.rho;
      s.tied = t.tied;
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_scatter_csv(std::ostream& out, const std::vector<LanguageMetricsRow>& rows) {
  out << "language,name,family,macroarea,macroareas,baseline,mean_distance,dominant,below_control\n";
  for (const auto& r : rows)
    out << detail::csv_escape(r.language) << ',' << detail::csv_escape(r.name) << ','
        << detail::csv_escape(r.family) << ',' << detail::csv_escape(hybrid_macroarea_label(r.macroareas))
        << ',' << detail::csv_escape(join(r.macroareas, ";")) << ',' << fmt(r.baseline) << ','
        << fmt(r.mean_distance) << ',' << dominant_label(r.dominant) << ','
        << (r.below_control() ? "true" : "false") << '\n';
}

void write_family_summary_csv(std::ostream& out, const std::vector<FamilySummary>& families) {
  out << "family,n_languages,typical_macroarea,rho_percent,tied,n_ndo,n_below_control\n";
  for (const auto& f : families)
    out << detail::csv_escape(f.family) << ',' << f.n_languages << ','
        << detail::csv_escape(f.typical_macroarea) << ',' << fmt(f.rho_percent) << ','
        << (f.tied ? "true" : "false") << ',' << f.n_ndo << ',' << f.n_below_control << '\n';
}

void write_ndo_csv(std::ostream& out, const std::vector<LanguageMetricsRow>& rows) {
  out << "language,name,family,macroarea,total,rho,baseline,mean_distance,below_control\n";
  for (const auto& r : rows) {
    if (!r.is_ndo()) continue;
    out << detail::csv_escape(r.language) << ',' << detail::csv_escape(r.name) << ','
        << detail::csv_escape(r.family) << ',' << detail::csv_escape(hybrid_macroarea_label(r.macroareas))
        << ',' << r.total << ',' << fmt(r.rho) << ',' << fmt(r.baseline) << ','
        << fmt(r.mean_distance) << ',' << (r.below_control() ? "true" : "false") << '\n';
  }
}

}  // namespace swapmin
