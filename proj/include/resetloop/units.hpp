#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace resetloop {

inline constexpr double kPi = std::numbers::pi;

// User-facing quantities are in Hz; everything internal is rad/s.
constexpr double hz_to_rad(double hz) { return 2.0 * kPi * hz; }
constexpr double rad_to_hz(double omega) { return omega / (2.0 * kPi); }

constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }
constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }

inline double to_db(double magnitude) { return 20.0 * std::log10(magnitude); }
inline double from_db(double db) { return std::pow(10.0, db / 20.0); }

inline double phase_deg(std::complex<double> z) { return rad_to_deg(std::arg(z)); }

}  // namespace resetloop
