#pragma once

// One-tailed Wilcoxon signed-rank test for matched pairs, with the
// alternative that the paired differences are stochastically negative.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace swapmin {

// How zero differences are treated.
//   Wilcox: dropped before ranking (Conover's classical treatment).
//   Pratt:  ranked together with the nonzero ones, then dropped.
enum class ZeroMethod { Wilcox, Pratt };

enum class TestMethod { Exact, Saddlepoint, NormalApprox };

// Approximation used once the sample is too large for the exact null.
enum class LargeSampleApprox { Saddlepoint, Normal };

std::string_view to_string(TestMethod m) noexcept;
std::string_view to_string(ZeroMethod m) noexcept;
std::string_view to_string(LargeSampleApprox a) noexcept;

struct TestResult {
  std::size_t n_used = 0;  // nonzero differences
  double statistic = 0.0;  // W+, sum of the ranks of positive differences
  double p = 1.0;          // P(W+ <= statistic) under the null
  double log_p = 0.0;      // natural log of p, meaningful beyond underflow
  TestMethod method = TestMethod::Exact;
};

// Ranks of the nonzero differences, doubled so mid-ranks stay integral.
struct SignedRanks {
  std::vector<std::int64_t> doubled_ranks;
  std::vector<bool> positive;
  bool irregular = false;  // ties, or Pratt ranks that are not 1..n

  std::size_t size() const noexcept { return doubled_ranks.size(); }
  std::int64_t doubled_statistic() const noexcept;
};

SignedRanks rank_differences(std::span<const double> deltas, ZeroMethod zeros = ZeroMethod::Wilcox);

// Sample sizes up to which the null distribution is computed exactly:
// regular ranks up to kExactMaxRegular, tied/irregular ranks (convolution
// over mid-ranks) up to kExactMaxIrregular. Larger samples are
// approximated, by default with a Lugannani-Rice saddlepoint expansion
// (continuity corrected on the rank lattice), optionally with the normal
// approximation with tie and continuity corrections.
inline constexpr std::size_t kExactMaxRegular = 25;
inline constexpr std::size_t kExactMaxIrregular = 60;

// Null distribution of W+ for a fixed multiset of ranks: every rank enters
// with a positive sign independently with probability 1/2.
class SignedRankNull {
 public:
  SignedRankNull(std::vector<std::int64_t> doubled_ranks, TestMethod method);

  // Picks the method by the thresholds above.
  static SignedRankNull for_sample(const SignedRanks& ranks,
                                   LargeSampleApprox approx = LargeSampleApprox::Saddlepoint);

  TestMethod method() const noexcept { return method_; }
  std::size_t n() const noexcept { return n_; }

  // ln P(2 W+ <= doubled_w).
  double log_cdf(std::int64_t doubled_w) const noexcept;
  // P(2 W+ <= doubled_w); exact methods return count / 2^n.
  double cdf(std::int64_t doubled_w) const noexcept;

 private:
  TestMethod method_;
  std::size_t n_;
  std::int64_t max_doubled_ = 0;
  double log_cdf_saddlepoint(std::int64_t doubled_w) const noexcept;
  double log_cdf_normal(std::int64_t doubled_w) const noexcept;
  double saddlepoint_lower(double x) const noexcept;

  std::vector<std::int64_t> ranks_;
  std::vector<std::uint64_t> cumulative_;  // exact only, index = doubled w
  std::int64_t lattice_ = 1;               // gcd of the doubled ranks
  double mean_doubled_ = 0.0;
  double sd_doubled_ = 0.0;
};

// Throws DataError("degenerate sample") when every difference is zero.
TestResult wilcoxon_one_tailed_less(std::span<const double> deltas,
                                    ZeroMethod zeros = ZeroMethod::Wilcox,
                                    LargeSampleApprox approx = LargeSampleApprox::Saddlepoint);

// Same test with the method forced, for comparing routes.
TestResult wilcoxon_one_tailed_less(std::span<const double> deltas, ZeroMethod zeros,
                                    TestMethod forced);

}  // namespace swapmin
