#pragma once

#include <numbers>

namespace klm::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Angular frequency (rad/s) from a value quoted as 2pi x MHz.
constexpr double mhz_2pi(double value) { return two_pi * 1e6 * value; }
/// Inverse of mhz_2pi.
constexpr double to_mhz_2pi(double rad_per_s) { return rad_per_s / (two_pi * 1e6); }

constexpr double ns(double value) { return value * 1e-9; }
constexpr double us(double value) { return value * 1e-6; }

} // namespace klm::units
