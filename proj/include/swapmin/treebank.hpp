#pragma once

// Subject/object/verb triplet extraction from dependency trees and the
// per-language order counts it produces.

#include <iosfwd>
#include <string>
#include <vector>

#include "swapmin/conllu.hpp"
#include "swapmin/permutohedron.hpp"

namespace swapmin {

// UD: content-head annotation. SUD: function-head annotation.
enum class AnnotationStyle { UD, SUD };

// How a verb with several qualifying subjects or objects is handled.
enum class DependentPolicy {
  AllPairs,  // one triplet per (subject, object) pair
  Nearest,   // only the subject and the object closest to the verb
};

struct Triplet {
  int subject = 0;
  int object = 0;
  int verb = 0;

  // Linear order of the three token positions.
  Order order() const;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

bool is_subject(const Token& dependent, AnnotationStyle style) noexcept;
bool is_object(const Token& dependent, AnnotationStyle style) noexcept;
bool is_verbal_head(const Token& head, AnnotationStyle style) noexcept;

std::vector<Triplet> extract_triplets(const Sentence& s, AnnotationStyle style,
                                      DependentPolicy policy = DependentPolicy::AllPairs);

struct TripletCounts {
  std::string language;
  Counts counts{};

  std::uint64_t total() const noexcept;
  TripletCounts& operator+=(const TripletCounts& other);
};

void add_sentence(TripletCounts& acc, const Sentence& s, AnnotationStyle style,
                  DependentPolicy policy = DependentPolicy::AllPairs);

// Drains the reader. Parse errors propagate per the reader's mode.
TripletCounts count_orders(ConlluReader& reader, AnnotationStyle style,
                           const std::string& language,
                           DependentPolicy policy = DependentPolicy::AllPairs);

TripletCounts count_orders(const std::vector<Sentence>& sentences, AnnotationStyle style,
                           const std::string& language,
                           DependentPolicy policy = DependentPolicy::AllPairs);

// Counts TSV: header "language\torder\tcount", one row per (language,
// order). Missing orders count as zero; duplicates, unknown labels and
// negative counts are errors. Result is sorted by language.
std::vector<TripletCounts> ingest_counts_table(std::istream& in,
                                               const std::string& source_name = "<counts>");

// Writes all six rows per language, languages in the given order, orders in
// canonical order.
void write_counts_table(std::ostream& out, const std::vector<TripletCounts>& table);

}  // namespace swapmin
