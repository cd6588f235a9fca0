#include "swapmin/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "swapmin/error.hpp"
#include "swapmin/normal_tail.hpp"

namespace swapmin {

std::string_view to_string(TestMethod m) noexcept {
  switch (m) {
    case TestMethod::Exact: return "exact";
    case TestMethod::Saddlepoint: return "saddlepoint";
    case TestMethod::NormalApprox: return "normal-approximation";
  }
  return "exact";
}

std::string_view to_string(ZeroMethod m) noexcept { return m == ZeroMethod::Wilcox ? "wilcox" : "pratt"; }

std::string_view to_string(LargeSampleApprox a) noexcept {
  return a == LargeSampleApprox::Saddlepoint ? "saddlepoint" : "normal";
}

std::int64_t SignedRanks::doubled_statistic() const noexcept {
  std::int64_t w = 0;
  for (std::size_t i = 0; i < doubled_ranks.size(); ++i)
    if (positive[i]) w += doubled_ranks[i];
  return w;
}

SignedRanks rank_differences(std::span<const double> deltas, ZeroMethod zeros) {
  std::vector<double> magnitude;
  std::vector<signed char> sign;
  magnitude.reserve(deltas.size());
  sign.reserve(deltas.size());
  for (double d : deltas) {
    if (!std::isfinite(d)) throw DataError("non-finite paired difference");
    if (d == 0.0 && zeros == ZeroMethod::Wilcox) continue;
    magnitude.push_back(std::abs(d));
    sign.push_back(d > 0.0 ? 1 : (d < 0.0 ? -1 : 0));
  }

  std::vector<std::size_t> idx(magnitude.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return magnitude[a] < magnitude[b]; });

  std::vector<std::int64_t> doubled(magnitude.size());
  bool ties = false;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i + 1;
    while (j < idx.size() && magnitude[idx[j]] == magnitude[idx[i]]) ++j;
    if (j - i > 1) ties = true;
    // Mid-rank of positions i+1..j is (i+1+j)/2; doubled that is i+1+j.
    const auto mid2 = static_cast<std::int64_t>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) doubled[idx[k]] = mid2;
    i = j;
  }

  SignedRanks out;
  bool had_zero = false;
  for (std::size_t i = 0; i < magnitude.size(); ++i) {
    if (sign[i] == 0) {
      had_zero = true;
      continue;
    }
    out.doubled_ranks.push_back(doubled[i]);
    out.positive.push_back(sign[i] > 0);
  }
  out.irregular = ties || had_zero;
  return out;
}

SignedRankNull::SignedRankNull(std::vector<std::int64_t> doubled_ranks, TestMethod method)
    : method_(method), n_(doubled_ranks.size()), ranks_(std::move(doubled_ranks)) {
  double sum_sq = 0.0;
  lattice_ = 0;
  for (auto r : ranks_) {
    max_doubled_ += r;
    sum_sq += static_cast<double>(r) * static_cast<double>(r);
    lattice_ = std::gcd(lattice_, r);
  }
  if (lattice_ == 0) lattice_ = 1;
  // Each doubled rank r contributes r or 0 with probability 1/2.
  mean_doubled_ = static_cast<double>(max_doubled_) / 2.0;
  sd_doubled_ = std::sqrt(sum_sq) / 2.0;

  if (method_ == TestMethod::Exact) {
    if (n_ > 63) throw std::invalid_argument("exact signed-rank null limited to n <= 63");
    // Subset-sum counts over doubled ranks.
    std::vector<std::uint64_t> ways(static_cast<std::size_t>(max_doubled_) + 1, 0);
    ways[0] = 1;
    std::int64_t reach = 0;
    for (auto r : ranks_) {
      reach += r;
      for (std::int64_t w = reach; w >= r; --w)
        ways[static_cast<std::size_t>(w)] += ways[static_cast<std::size_t>(w - r)];
    }
    cumulative_.resize(ways.size());
    std::partial_sum(ways.begin(), ways.end(), cumulative_.begin());
  }
}

SignedRankNull SignedRankNull::for_sample(const SignedRanks& ranks, LargeSampleApprox approx) {
  const std::size_t limit = ranks.irregular ? kExactMaxIrregular : kExactMaxRegular;
  TestMethod method = TestMethod::Exact;
  if (ranks.size() > limit)
    method = approx == LargeSampleApprox::Saddlepoint ? TestMethod::Saddlepoint
                                                      : TestMethod::NormalApprox;
  return SignedRankNull(ranks.doubled_ranks, method);
}

double SignedRankNull::log_cdf_normal(std::int64_t doubled_w) const noexcept {
  // Continuity correction of half a lattice step.
  const double x = static_cast<double>(doubled_w) + 0.5 * static_cast<double>(lattice_);
  return std::min(0.0, log_tail_normal((x - mean_doubled_) / sd_doubled_));
}

namespace {

// Within this many lattice steps of the minimum the tail is summed exactly;
// the saddlepoint's relative error grows when only a handful of lattice
// points lie in the tail.
constexpr std::int64_t kExactTailSteps = 256;

// ln P(2W+ <= limit) by convolution truncated at limit.
double log_truncated_tail(const std::vector<std::int64_t>& ranks, std::int64_t limit) {
  std::vector<double> ways(static_cast<std::size_t>(limit) + 1, 0.0);
  ways[0] = 1.0;
  for (auto r : ranks) {
    if (r > limit) continue;
    for (std::int64_t w = limit; w >= r; --w)
      ways[static_cast<std::size_t>(w)] += ways[static_cast<std::size_t>(w - r)];
  }
  double total = 0.0;
  for (double v : ways) total += v;
  return std::log(total) - static_cast<double>(ranks.size()) * std::numbers::ln2;
}

}  // namespace

// ln P(2W+ <= x - lattice/2) for x below the mean, by Lugannani-Rice.
double SignedRankNull::saddlepoint_lower(double x) const noexcept {
  const double h = static_cast<double>(lattice_);
  const auto target = static_cast<std::int64_t>(std::floor(x - h / 2.0 + 0.5));
  if (target < kExactTailSteps * lattice_) return log_truncated_tail(ranks_, target);

  // Cumulant generating function of sum r_i B_i, B_i ~ Bernoulli(1/2):
  // K(t) = sum log((1 + e^{t r})/2). Derivatives written to stay finite for
  // large |t r|.
  auto k0 = [&](double t) {
    double k = 0.0;
    for (auto ri : ranks_) {
      const double a = t * static_cast<double>(ri);
      k += std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))) - std::numbers::ln2;
    }
    return k;
  };
  auto k1 = [&](double t) {
    double k = 0.0;
    for (auto ri : ranks_) {
      const double r = static_cast<double>(ri);
      const double e = std::exp(-std::abs(t * r));
      k += t * r >= 0.0 ? r / (1.0 + e) : r * e / (1.0 + e);
    }
    return k;
  };
  auto k2 = [&](double t) {
    double k = 0.0;
    for (auto ri : ranks_) {
      const double r = static_cast<double>(ri);
      const double e = std::exp(-std::abs(t * r));
      k += r * r * e / ((1.0 + e) * (1.0 + e));
    }
    return k;
  };

  const double var = sd_doubled_ * sd_doubled_;
  // Solve K'(t) = x for t < 0 by safeguarded Newton.
  double lo = -1.0, hi = 0.0;
  while (k1(lo) > x) {
    hi = lo;
    lo *= 2.0;
    if (lo < -1e6) break;
  }
  double t = std::max(lo, std::min(hi, (x - mean_doubled_) / var));
  for (int iter = 0; iter < 200; ++iter) {
    const double f = k1(t) - x;
    if (f > 0.0) hi = t; else lo = t;
    const double d = k2(t);
    double next = t - f / d;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t))) {
      t = next;
      break;
    }
    t = next;
  }

  const double w_hat = -std::sqrt(std::max(0.0, 2.0 * (t * x - k0(t))));
  const double u_hat = 2.0 * std::sinh(t * h / 2.0) * std::sqrt(k2(t)) / h;
  if (!(w_hat < -1e-4)) {
    // Too close to the centre for the expansion; fall back to the normal.
    return log_tail_normal((x - mean_doubled_) / sd_doubled_);
  }
  const double log_phi = log_tail_normal(w_hat);
  const double log_density = -0.5 * w_hat * w_hat - 0.5 * std::log(2.0 * std::numbers::pi);
  const double correction = std::exp(log_density - log_phi) * (1.0 / w_hat - 1.0 / u_hat);
  if (!(correction > -1.0)) return log_tail_normal((x - mean_doubled_) / sd_doubled_);
  return log_phi + std::log1p(correction);
}

double SignedRankNull::log_cdf_saddlepoint(std::int64_t doubled_w) const noexcept {
  const double half_step = 0.5 * static_cast<double>(lattice_);
  const double x = static_cast<double>(doubled_w) + half_step;
  if (x == mean_doubled_) return -std::numbers::ln2;  // symmetric null
  if (x < mean_doubled_) return std::min(0.0, saddlepoint_lower(x));
  // Upper half through the symmetry 2W+ ~ S - 2W+:
  // P(2W+ <= w) = 1 - P(2W+ <= S - w - lattice).
  const double reflected = static_cast<double>(max_doubled_ - doubled_w) - half_step;
  return std::log1p(-std::exp(std::min(0.0, saddlepoint_lower(reflected))));
}

double SignedRankNull::log_cdf(std::int64_t doubled_w) const noexcept {
  if (doubled_w < 0) return -INFINITY;
  if (doubled_w >= max_doubled_) return 0.0;
  switch (method_) {
    case TestMethod::Exact: {
      const auto count = cumulative_[static_cast<std::size_t>(doubled_w)];
      return std::log(static_cast<double>(count)) - static_cast<double>(n_) * std::numbers::ln2;
    }
    case TestMethod::Saddlepoint: return log_cdf_saddlepoint(doubled_w);
    case TestMethod::NormalApprox: return log_cdf_normal(doubled_w);
  }
  return 0.0;
}

double SignedRankNull::cdf(std::int64_t doubled_w) const noexcept {
  if (doubled_w < 0) return 0.0;
  if (doubled_w >= max_doubled_) return 1.0;
  if (method_ == TestMethod::Exact) {
    const auto count = cumulative_[static_cast<std::size_t>(doubled_w)];
    return std::ldexp(static_cast<double>(count), -static_cast<int>(n_));
  }
  return std::exp(log_cdf(doubled_w));
}

namespace {

TestResult run_test(const SignedRanks& ranks, const SignedRankNull& null) {
  const std::int64_t w2 = ranks.doubled_statistic();
  TestResult r;
  r.n_used = ranks.size();
  r.statistic = static_cast<double>(w2) / 2.0;
  r.method = null.method();
  r.log_p = null.log_cdf(w2);
  r.p = null.cdf(w2);
  return r;
}

}  // namespace

TestResult wilcoxon_one_tailed_less(std::span<const double> deltas, ZeroMethod zeros,
                                    LargeSampleApprox approx) {
  const SignedRanks ranks = rank_differences(deltas, zeros);
  if (ranks.size() == 0) throw DataError("degenerate sample: all paired differences are zero");
  return run_test(ranks, SignedRankNull::for_sample(ranks, approx));
}

TestResult wilcoxon_one_tailed_less(std::span<const double> deltas, ZeroMethod zeros,
                                    TestMethod forced) {
  const SignedRanks ranks = rank_differences(deltas, zeros);
  if (ranks.size() == 0) throw DataError("degenerate sample: all paired differences are zero");
  return run_test(ranks, SignedRankNull(ranks.doubled_ranks, forced));
}

}  // namespace swapmin
