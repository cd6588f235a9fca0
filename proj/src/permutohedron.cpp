#include "swapmin/permutohedron.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "swapmin/error.hpp"

namespace swapmin {

namespace {

constexpr std::array<std::string_view, kOrderCount> kLabels = {"SOV", "SVO", "VSO",
                                                               "VOS", "OVS", "OSV"};

int inversion_count(std::string_view a, std::string_view b) noexcept {
  // Position of each constituent within b, then count pairs of a that b
  // places in the opposite relative order.
  auto pos_in_b = [&](char c) { return static_cast<int>(b.find(c)); };
  int inversions = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (pos_in_b(a[i]) > pos_in_b(a[j])) ++inversions;
    }
  }
  return inversions;
}

SwapDistanceMatrix build_inversion_matrix() noexcept {
  SwapDistanceMatrix m{};
  for (std::size_t i = 0; i < kOrderCount; ++i)
    for (std::size_t j = 0; j < kOrderCount; ++j)
      m[i][j] = inversion_count(kLabels[i], kLabels[j]);
  return m;
}

}  // namespace

std::string_view to_string(Order o) noexcept { return kLabels[index_of(o)]; }

std::optional<Order> parse_order(std::string_view label) noexcept {
  for (std::size_t i = 0; i < kOrderCount; ++i)
    if (kLabels[i] == label) return static_cast<Order>(i);
  return std::nullopt;
}

Order order_from_sequence(char first, char second, char third) {
  const char seq[3] = {first, second, third};
  if (auto o = parse_order(std::string_view(seq, 3))) return *o;
  throw std::invalid_argument("not an S/O/V arrangement: " + std::string(seq, 3));
}

const SwapDistanceMatrix& swap_distance_matrix() noexcept {
  static const SwapDistanceMatrix table = build_inversion_matrix();
  return table;
}

int swap_distance(Order a, Order b) noexcept {
  return swap_distance_matrix()[index_of(a)][index_of(b)];
}

SwapDistanceMatrix hexagon_distance_matrix() noexcept {
  SwapDistanceMatrix m{};
  const int n = static_cast<int>(kOrderCount);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int step = std::abs(i - j);
      m[i][j] = std::min(step, n - step);
    }
  }
  return m;
}

OrderDistribution OrderDistribution::from_counts(const Counts& counts) {
  OrderDistribution d;
  d.counts_ = counts;
  d.has_counts_ = true;
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw DataError("order distribution has no observations");
  const auto denom = static_cast<double>(total);
  for (std::size_t i = 0; i < kOrderCount; ++i)
    d.probs_[i] = static_cast<double>(counts[i]) / denom;
  return d;
}

OrderDistribution OrderDistribution::from_probabilities(const Probabilities& probs) {
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0)
      throw DataError("order probabilities must be finite and non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DataError("order probabilities must sum to 1");
  OrderDistribution d;
  d.probs_ = probs;
  return d;
}

std::uint64_t OrderDistribution::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

double mean_swap_distance(const OrderDistribution& dist) noexcept {
  const auto& d = swap_distance_matrix();
  const auto& p = dist.probs();
  double sum = 0.0;
  for (std::size_t i = 0; i < kOrderCount; ++i)
    for (std::size_t j = 0; j < kOrderCount; ++j) sum += d[i][j] * p[i] * p[j];
  return sum;
}

double simpson_index(const OrderDistribution& dist) noexcept {
  double s = 0.0;
  for (double p : dist.probs()) s += p * p;
  return s;
}

double random_baseline(const OrderDistribution& dist) noexcept {
  return 9.0 / 5.0 * (1.0 - simpson_index(dist));
}

std::vector<OrderDistribution> enumerate_shuffles(const OrderDistribution& dist) {
  std::array<std::size_t, kOrderCount> perm{};
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<OrderDistribution> out;
  out.reserve(720);
  const auto& p = dist.probs();
  do {
    Probabilities shuffled{};
    for (std::size_t v = 0; v < kOrderCount; ++v) shuffled[v] = p[perm[v]];
    OrderDistribution d;
    d.probs_ = shuffled;
    out.push_back(d);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

std::string DominantOrderClass::label() const {
  return dominant ? std::string(to_string(*dominant)) : std::string("NDO");
}

DominantOrderClass classify_dominant_order(const OrderDistribution& dist, double rho0) {
  if (!(rho0 > 0.0 && rho0 <= 1.0)) throw std::invalid_argument("rho0 must lie in (0, 1]");
  const auto& p = dist.probs();
  std::size_t top = 0;
  for (std::size_t i = 1; i < kOrderCount; ++i)
    if (p[i] > p[top]) top = i;
  double second = 0.0;
  for (std::size_t i = 0; i < kOrderCount; ++i)
    if (i != top) second = std::max(second, p[i]);

  DominantOrderClass cls;
  cls.rho = second / p[top];
  if (cls.rho < rho0) cls.dominant = static_cast<Order>(top);
  return cls;
}

}  // namespace swapmin
