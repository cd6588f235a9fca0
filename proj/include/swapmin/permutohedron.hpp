#pragma once

// Orders of subject, object and verb on the six-vertex permutohedron, plus
// the per-language scalar metrics built on top of it.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace swapmin {

// Canonical index order walks the hexagon: every consecutive pair (and the
// wrap-around OSV -> SOV) differs by one adjacent swap.
enum class Order : std::uint8_t { SOV = 0, SVO, VSO, VOS, OVS, OSV };

inline constexpr std::size_t kOrderCount = 6;

inline constexpr std::array<Order, kOrderCount> kAllOrders = {
    Order::SOV, Order::SVO, Order::VSO, Order::VOS, Order::OVS, Order::OSV};

constexpr std::size_t index_of(Order o) noexcept { return static_cast<std::size_t>(o); }

std::string_view to_string(Order o) noexcept;

// Accepts the three-letter labels ("SOV", ...). Returns nullopt otherwise.
std::optional<Order> parse_order(std::string_view label) noexcept;

// Builds an order from the constituent letters in linear order, e.g. "OVS".
// Same as parse_order; kept separate for readability at call sites that
// assemble the label from token positions.
Order order_from_sequence(char first, char second, char third);

// Kendall-tau inversion count between two orders: the minimum number of
// adjacent swaps turning one into the other.
int swap_distance(Order a, Order b) noexcept;

using SwapDistanceMatrix = std::array<std::array<int, kOrderCount>, kOrderCount>;

// Distance table computed from inversion counts.
const SwapDistanceMatrix& swap_distance_matrix() noexcept;

// Distance table computed as shortest-path length on the 6-cycle.
SwapDistanceMatrix hexagon_distance_matrix() noexcept;

using Probabilities = std::array<double, kOrderCount>;
using Counts = std::array<std::uint64_t, kOrderCount>;

// Relative frequencies of the six orders for one language.
class OrderDistribution {
 public:
  // Throws DataError when every count is zero.
  static OrderDistribution from_counts(const Counts& counts);

  // Direct probability input, mainly for tests. Entries must be finite and
  // non-negative and sum to 1 within 1e-9. Carries no counts.
  static OrderDistribution from_probabilities(const Probabilities& probs);

  const Probabilities& probs() const noexcept { return probs_; }
  double prob(Order o) const noexcept { return probs_[index_of(o)]; }

  bool has_counts() const noexcept { return has_counts_; }
  const Counts& counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept;

 private:
  friend std::vector<OrderDistribution> enumerate_shuffles(const OrderDistribution& dist);

  OrderDistribution() = default;

  Counts counts_{};
  Probabilities probs_{};
  bool has_counts_ = false;
};

// <d> = sum_i sum_j d_ij p_i p_j over all 36 pairs.
double mean_swap_distance(const OrderDistribution& dist) noexcept;

// S = sum_i p_i^2.
double simpson_index(const OrderDistribution& dist) noexcept;

// Expected <d> over all 720 vertex assignments of the same frequencies:
// (9/5)(1 - S).
double random_baseline(const OrderDistribution& dist) noexcept;

// Every assignment of the six probabilities to the six vertices, one per
// permutation of vertex positions (so 720 entries even when values repeat).
std::vector<OrderDistribution> enumerate_shuffles(const OrderDistribution& dist);

inline constexpr double kDefaultRho0 = 0.5;

struct DominantOrderClass {
  std::optional<Order> dominant;  // nullopt means no dominant order (NDO)
  double rho = 0.0;               // second-highest / highest probability

  bool is_ndo() const noexcept { return !dominant.has_value(); }
  std::string label() const;  // order label or "NDO"
};

// rho0 must lie in (0, 1]; throws std::invalid_argument otherwise.
DominantOrderClass classify_dominant_order(const OrderDistribution& dist,
                                           double rho0 = kDefaultRho0);

}  // namespace swapmin
