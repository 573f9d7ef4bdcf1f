#pragma once

#include <numbers>

namespace nvp {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA 2018
inline constexpr double kHbar = 1.054571817e-34;        // J s
inline constexpr double kMu0Over4Pi = 1.00000000055e-7;  // T m / A
inline constexpr double kGammaElectron = 1.76085963023e11;  // rad / (s T)

inline constexpr double to_angular(double ordinary_hz) { return kTwoPi * ordinary_hz; }
inline constexpr double to_ordinary(double angular) { return angular / kTwoPi; }

inline constexpr double kNano = 1e-9;
inline constexpr double kMHz = 1e6;
inline constexpr double kGHz = 1e9;
inline constexpr double kTHz = 1e12;

}  // namespace nvp
