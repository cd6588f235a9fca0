#include "swapmin/normal_tail.hpp"

#include <cmath>
#include <numbers>

namespace swapmin {

namespace {

constexpr double kAsymptoticBelow = -20.0;

// Mills-ratio series: Phi(z) = phi(z)/|z| * (1 - 1/z^2 + 3/z^4 - 15/z^6 ...).
// For |z| >= 20 the terms shrink by at least (2k+1)/400 per step.
double log_lower_tail_asymptotic(double z) noexcept {
  const double x2 = z * z;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 40; ++k) {
    term *= -(2.0 * k - 1.0) / x2;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return -0.5 * x2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(sum);
}

}  // namespace

double log_tail_normal(double z) noexcept {
  if (std::isnan(z)) return z;
  if (z < kAsymptoticBelow) return log_lower_tail_asymptotic(z);
  if (z < 0.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  // Upper half: ln(1 - Q) with Q the upper tail.
  return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
}

}  // namespace swapmin
