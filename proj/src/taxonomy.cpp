#include "swapmin/taxonomy.hpp"

#include <algorithm>
#include <istream>
#include <json.hpp>

#include "csv.hpp"
#include "swapmin/error.hpp"

namespace swapmin {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

int kind_rank(LanguoidKind k) noexcept {
  switch (k) {
    case LanguoidKind::Language: return 0;
    case LanguoidKind::Dialect: return 1;
    case LanguoidKind::Macrolanguage: return 2;
    case LanguoidKind::Pseudo: return 3;
  }
  return 3;
}

}  // namespace

std::string_view to_string(LanguoidKind k) noexcept {
  switch (k) {
    case LanguoidKind::Language: return "language";
    case LanguoidKind::Dialect: return "dialect";
    case LanguoidKind::Macrolanguage: return "macrolanguage";
    case LanguoidKind::Pseudo: return "pseudo";
  }
  return "pseudo";
}

std::optional<LanguoidKind> parse_languoid_kind(std::string_view s) noexcept {
  for (auto k : {LanguoidKind::Language, LanguoidKind::Dialect, LanguoidKind::Macrolanguage,
                 LanguoidKind::Pseudo})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

void Taxonomy::insert(Languoid l) {
  const std::string code = l.glottocode;
  const std::string name = l.name;
  if (!by_code_.emplace(code, std::move(l)).second)
    throw DataError("duplicate glottocode '" + code + "'");
  by_name_[name].push_back(code);
}

const Languoid* Taxonomy::find_glottocode(const std::string& code) const {
  auto it = by_code_.find(code);
  return it == by_code_.end() ? nullptr : &it->second;
}

const Languoid* Taxonomy::find_name(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end() || it->second.size() != 1) return nullptr;
  return find_glottocode(it->second.front());
}

Taxonomy load_taxonomy(std::istream& in, const TaxonomyOptions& options,
                       const std::string& source_name) {
  Taxonomy table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    header = detail::split_csv_line(line);
    break;
  }
  if (header.empty()) return table;

  auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
    if (required) throw ParseError(source_name, line_no, "missing required column '" + name + "'");
    return std::nullopt;
  };
  const auto& cols = options.columns;
  const auto c_code = *column(cols.glottocode, true);
  const auto c_name = *column(cols.name, true);
  const auto c_family = *column(cols.family, true);
  const auto c_areas = *column(cols.macroareas, true);
  const auto c_kind = column(cols.kind, false);
  const auto c_language = column(cols.language, false);

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != header.size())
      throw ParseError(source_name, line_no,
                       "expected " + std::to_string(header.size()) + " columns, found " +
                           std::to_string(f.size()));
    Languoid l;
    l.glottocode = trim(f[c_code]);
    if (l.glottocode.empty()) throw ParseError(source_name, line_no, "empty glottocode");
    l.name = trim(f[c_name]);
    l.family = trim(f[c_family]);
    if (l.family.empty()) l.family = l.name.empty() ? l.glottocode : l.name;

    std::string_view areas = f[c_areas];
    while (!areas.empty()) {
      const auto sep = areas.find(cols.macroarea_separator);
      auto area = trim(areas.substr(0, sep));
      if (!area.empty()) l.macroareas.insert(std::move(area));
      if (sep == std::string_view::npos) break;
      areas.remove_prefix(sep + 1);
    }

    if (c_kind) {
      const auto kind_text = trim(f[*c_kind]);
      if (!kind_text.empty()) {
        auto k = parse_languoid_kind(kind_text);
        if (!k) throw ParseError(source_name, line_no, "unknown kind '" + kind_text + "'");
        l.kind = *k;
      }
    }
    l.language = c_language ? trim(f[*c_language]) : std::string{};
    if (l.language.empty()) l.language = l.glottocode;
    l.excluded = l.kind == LanguoidKind::Pseudo || options.pseudo_families.contains(l.family);

    try {
      table.insert(std::move(l));
    } catch (const DataError& e) {
      throw ParseError(source_name, line_no, e.what());
    }
  }
  return table;
}

AliasMap load_aliases(std::istream& in, const std::string& source_name) {
  AliasMap aliases;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with('#')) continue;
    if (line_no == 1 && line.starts_with("local_id")) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw ParseError(source_name, line_no, "expected 'local_id<TAB>glottocode'");
    auto local = line.substr(0, tab);
    auto code = line.substr(tab + 1);
    if (!aliases.emplace(local, code).second)
      throw ParseError(source_name, line_no, "duplicate alias '" + local + "'");
  }
  return aliases;
}

std::string ExclusionReport::to_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& e : entries) arr.push_back({{"id", e.id}, {"reason", e.reason}});
  return arr.dump(2);
}

const Languoid* resolve_language(const std::string& id, const Taxonomy& table,
                                 const AliasMap& aliases, ExclusionReport& report) {
  if (const auto* l = table.find_glottocode(id)) return l;
  if (auto it = aliases.find(id); it != aliases.end()) {
    if (const auto* l = table.find_glottocode(it->second)) return l;
    report.add(id, "alias target '" + it->second + "' not in taxonomy");
    return nullptr;
  }
  if (const auto* l = table.find_name(id)) return l;
  report.add(id, "unresolved language id");
  return nullptr;
}

const Languoid& resolve_language(const std::string& id, const Taxonomy& table,
                                 const AliasMap& aliases) {
  ExclusionReport report;
  if (const auto* l = resolve_language(id, table, aliases, report)) return *l;
  throw DataError(id + ": " + report.entries.front().reason);
}

std::vector<Sample> dedup_samples(const std::vector<Sample>& samples, ExclusionReport* removed) {
  // Winner index per language.
  std::map<std::string, std::size_t> best;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    auto [it, fresh] = best.emplace(s.languoid.language, i);
    if (fresh) continue;
    const auto& cur = samples[it->second];
    const int rs = kind_rank(s.languoid.kind), rc = kind_rank(cur.languoid.kind);
    if (rs < rc || (rs == rc && s.id < cur.id)) it->second = i;
  }
  std::vector<Sample> kept;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const std::size_t winner = best.at(s.languoid.language);
    if (winner == i) {
      kept.push_back(s);
    } else if (removed != nullptr) {
      removed->add(s.id, "redundant " + std::string(to_string(s.languoid.kind)) + " sample of " +
                             s.languoid.language + "; kept " + samples[winner].id);
    }
  }
  return kept;
}

TypicalMacroarea typical_macroarea(const std::vector<std::set<std::string>>& member_macroareas) {
  if (member_macroareas.empty()) throw DataError("family has no members");
  TypicalMacroarea out;
  const double n = static_cast<double>(member_macroareas.size());
  for (const auto& areas : member_macroareas) {
    if (areas.empty()) throw DataError("family member without macroarea");
    const double w = 1.0 / static_cast<double>(areas.size());
    for (const auto& a : areas) out.all[a] += w;
  }
  for (auto& [area, rho] : out.all) rho /= n;
  // std::map iterates lexicographically, so the first maximum wins ties.
  for (const auto& [area, rho] : out.all) {
    if (out.macroarea.empty() || rho > out.rho) {
      out.macroarea = area;
      out.rho = rho;
      out.tied = false;
    } else if (rho == out.rho) {
      out.tied = true;
    }
  }
  return out;
}

std::string hybrid_macroarea_label(const std::set<std::string>& macroareas) {
  std::string out;
  for (const auto& a : macroareas) {
    if (!out.empty()) out += " - ";
    out += a;
  }
  return out;
}

}  // namespace swapmin
