#pragma once

#include <numbers>

namespace ntnprs {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double kSpeedOfLight = 299792458.0;      // m/s
inline constexpr double kEarthRadius = 6371.0e3;          // m, spherical Earth
inline constexpr double kEarthGm = 398600.4418e9;         // m^3/s^2
inline constexpr double kEarthRotationRate = 7.2921159e-5;  // rad/s

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace ntnprs
