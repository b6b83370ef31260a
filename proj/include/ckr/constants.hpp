#pragma once

#include <numbers>

namespace ckr {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA-2018 values, SI
inline constexpr double hbar = 1.054571817e-34;     // J s
inline constexpr double planck_h = 6.62607015e-34;  // J s
inline constexpr double c_light = 2.99792458e8;     // m/s

}  // namespace ckr
