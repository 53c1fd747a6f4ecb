#pragma once

#include <numbers>

namespace pulsepol::units {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Frequencies are angular (rad/s) everywhere inside the library. These
// helpers convert the "(2π) MHz" values used at the interfaces.
constexpr double mhz(double value) { return kTwoPi * value * 1e6; }
constexpr double khz(double value) { return kTwoPi * value * 1e3; }
constexpr double ghz(double value) { return kTwoPi * value * 1e9; }
constexpr double to_mhz(double angular) { return angular / (kTwoPi * 1e6); }

constexpr double ns(double value) { return value * 1e-9; }
constexpr double us(double value) { return value * 1e-6; }

constexpr double deg(double value) { return value * kPi / 180.0; }
constexpr double to_deg(double radians) { return radians * 180.0 / kPi; }

}  // namespace pulsepol::units
