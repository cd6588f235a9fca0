#include "swapmin/treebank.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>

#include "swapmin/error.hpp"

namespace swapmin {

namespace {

// deprel equals base, or base followed by a subtype separator and more.
bool matches_with_subtypes(std::string_view deprel, std::string_view base, char sep) noexcept {
  if (!deprel.starts_with(base)) return false;
  return deprel.size() == base.size() || deprel[base.size()] == sep;
}

bool in_set(std::string_view upos, std::initializer_list<std::string_view> tags) noexcept {
  return std::find(tags.begin(), tags.end(), upos) != tags.end();
}

bool nominal(const Token& t, AnnotationStyle style) noexcept {
  if (style == AnnotationStyle::UD) return in_set(t.upos, {"NOUN", "PRON", "PROPN"});
  return in_set(t.upos, {"NOUN", "PRON", "PROPN", "ADP"});
}

}  // namespace

Order Triplet::order() const {
  std::array<std::pair<int, char>, 3> slots = {
      std::pair{subject, 'S'}, std::pair{object, 'O'}, std::pair{verb, 'V'}};
  std::sort(slots.begin(), slots.end());
  return order_from_sequence(slots[0].second, slots[1].second, slots[2].second);
}

bool is_verbal_head(const Token& head, AnnotationStyle style) noexcept {
  if (style == AnnotationStyle::UD) return head.upos == "VERB";
  return head.upos == "VERB" || head.upos == "AUX";
}

bool is_subject(const Token& t, AnnotationStyle style) noexcept {
  if (!nominal(t, style)) return false;
  if (style == AnnotationStyle::UD)
    return matches_with_subtypes(t.deprel, "nsubj", ':') ||
           matches_with_subtypes(t.deprel, "obl:subj", ':');
  return matches_with_subtypes(t.deprel, "subj", '@') ||
         matches_with_subtypes(t.deprel, "udep@subj", '@');
}

bool is_object(const Token& t, AnnotationStyle style) noexcept {
  if (!nominal(t, style)) return false;
  if (style == AnnotationStyle::UD)
    return matches_with_subtypes(t.deprel, "obj", ':') ||
           matches_with_subtypes(t.deprel, "obl:obj", ':');
  if (t.upos == "SCONJ") return false;  // clausal objects
  return matches_with_subtypes(t.deprel, "comp:obj", '@') ||
         matches_with_subtypes(t.deprel, "udep@obj", '@');
}

std::vector<Triplet> extract_triplets(const Sentence& s, AnnotationStyle style,
                                      DependentPolicy policy) {
  std::vector<Triplet> out;
  const int n = static_cast<int>(s.tokens.size());
  std::vector<std::vector<int>> subjects(static_cast<std::size_t>(n) + 1);
  std::vector<std::vector<int>> objects(static_cast<std::size_t>(n) + 1);
  for (const Token& t : s.tokens) {
    if (t.head == 0) continue;
    if (is_subject(t, style)) subjects[static_cast<std::size_t>(t.head)].push_back(t.id);
    if (is_object(t, style)) objects[static_cast<std::size_t>(t.head)].push_back(t.id);
  }

  // Closest to the verb; ties go to the earlier token.
  auto nearest = [](const std::vector<int>& ids, int verb) {
    return *std::min_element(ids.begin(), ids.end(), [verb](int a, int b) {
      const int da = std::abs(a - verb), db = std::abs(b - verb);
      return da != db ? da < db : a < b;
    });
  };

  for (const Token& verb : s.tokens) {
    const auto& subj = subjects[static_cast<std::size_t>(verb.id)];
    const auto& obj = objects[static_cast<std::size_t>(verb.id)];
    if (subj.empty() || obj.empty() || !is_verbal_head(verb, style)) continue;
    if (policy == DependentPolicy::Nearest) {
      out.push_back({nearest(subj, verb.id), nearest(obj, verb.id), verb.id});
      continue;
    }
    for (int si : subj)
      for (int oi : obj) out.push_back({si, oi, verb.id});
  }
  return out;
}

std::uint64_t TripletCounts::total() const noexcept {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

TripletCounts& TripletCounts::operator+=(const TripletCounts& other) {
  for (std::size_t i = 0; i < kOrderCount; ++i) counts[i] += other.counts[i];
  return *this;
}

void add_sentence(TripletCounts& acc, const Sentence& s, AnnotationStyle style,
                  DependentPolicy policy) {
  for (const Triplet& t : extract_triplets(s, style, policy)) ++acc.counts[index_of(t.order())];
}

TripletCounts count_orders(ConlluReader& reader, AnnotationStyle style,
                           const std::string& language, DependentPolicy policy) {
  TripletCounts acc{language, {}};
  while (auto s = reader.next()) add_sentence(acc, *s, style, policy);
  return acc;
}

TripletCounts count_orders(const std::vector<Sentence>& sentences, AnnotationStyle style,
                           const std::string& language, DependentPolicy policy) {
  TripletCounts acc{language, {}};
  for (const Sentence& s : sentences) add_sentence(acc, s, style, policy);
  return acc;
}

std::vector<TripletCounts> ingest_counts_table(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::map<std::string, TripletCounts> by_language;
  std::map<std::string, std::array<bool, kOrderCount>> seen;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "language\torder\tcount")
        throw ParseError(source_name, line_no, "expected header 'language<TAB>order<TAB>count'");
      header_seen = true;
      continue;
    }
    std::string_view rest(line);
    std::array<std::string_view, 3> cols;
    for (std::size_t c = 0; c < 3; ++c) {
      const auto tab = rest.find('\t');
      if ((c < 2) == (tab == std::string_view::npos))
        throw ParseError(source_name, line_no, "expected 3 tab-separated columns");
      cols[c] = rest.substr(0, tab);
      if (tab != std::string_view::npos) rest.remove_prefix(tab + 1);
    }
    const std::string language(cols[0]);
    if (language.empty()) throw ParseError(source_name, line_no, "empty language id");
    const auto order = parse_order(cols[1]);
    if (!order) throw ParseError(source_name, line_no, "unknown order '" + std::string(cols[1]) + "'");
    if (cols[2].starts_with('-')) throw ParseError(source_name, line_no, "negative count");
    std::uint64_t count = 0;
    auto [ptr, ec] = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), count);
    if (ec != std::errc{} || ptr != cols[2].data() + cols[2].size() || cols[2].empty())
      throw ParseError(source_name, line_no, "unparsable count '" + std::string(cols[2]) + "'");

    auto& flags = seen[language];
    if (flags[index_of(*order)])
      throw ParseError(source_name, line_no,
                       "duplicate row for " + language + "/" + std::string(cols[1]));
    flags[index_of(*order)] = true;
    auto& rec = by_language[language];
    rec.language = language;
    rec.counts[index_of(*order)] = count;
  }

  std::vector<TripletCounts> out;
  out.reserve(by_language.size());
  for (auto& [_, rec] : by_language) out.push_back(std::move(rec));
  return out;
}

void write_counts_table(std::ostream& out, const std::vector<TripletCounts>& table) {
  out << "language\torder\tcount\n";
  for (const auto& rec : table)
    for (Order o : kAllOrders)
      out << rec.language << '\t' << to_string(o) << '\t' << rec.counts[index_of(o)] << '\n';
}

}  // namespace swapmin
