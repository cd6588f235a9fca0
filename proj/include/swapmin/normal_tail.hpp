#pragma once

namespace swapmin {

// ln Phi(z) for the standard normal CDF, accurate in the far lower tail
// (z down to about -40 and beyond) where Phi itself underflows.
double log_tail_normal(double z) noexcept;

}  // namespace swapmin
