#pragma once

// Constellation propagation, user placement, visibility and per-link channel
// parameters on a spherical Earth.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ntnprs/constants.hpp"
#include "ntnprs/error.hpp"

namespace ntnprs {

using Vec3 = Eigen::Vector3d;

struct UserLocation {
  int id = 0;
  double latitude = 0.0;   // rad
  double longitude = 0.0;  // rad
  double altitude = 0.0;   // m above mean sea level

  [[nodiscard]] Vec3 ecef() const {
    const double r = kEarthRadius + altitude;
    return {r * std::cos(latitude) * std::cos(longitude), r * std::cos(latitude) * std::sin(longitude),
            r * std::sin(latitude)};
  }

  void validate() const {
    if (!(latitude >= -kPi / 2 && latitude <= kPi / 2) || !(longitude >= -kPi && longitude < kPi) ||
        !(altitude >= 0.0)) {
      fail(ErrorCode::kInvalidArgument, "user " + std::to_string(id) + ": location out of range");
    }
  }
};

struct SatelliteState {
  int sat_id = 0;
  Vec3 position = Vec3::Zero();  // m
  Vec3 velocity = Vec3::Zero();  // m/s
  double epoch = 0.0;            // s
};

/// Walker-delta shell of circular orbits.
struct ShellConfig {
  double altitude = 554.0e3;
  double inclination = deg2rad(53.0);
  int plane_count = 72;
  int sats_per_plane = 22;
  int phasing = 1;

  [[nodiscard]] int size() const { return plane_count * sats_per_plane; }
  [[nodiscard]] double radius() const { return kEarthRadius + altitude; }
  [[nodiscard]] double mean_motion() const { return std::sqrt(kEarthGm / (radius() * radius() * radius())); }

  void validate() const {
    if (plane_count < 1 || sats_per_plane < 1) fail(ErrorCode::kInvalidArgument, "shell: empty constellation");
    if (!(inclination >= 0.0 && inclination <= kPi)) fail(ErrorCode::kInvalidArgument, "shell: inclination");
    if (!(altitude > 0.0)) fail(ErrorCode::kInvalidArgument, "shell: altitude must be positive");
  }
};

struct LookGeometry {
  double elevation = 0.0;      // rad
  double slant_range = 0.0;    // m
  double range_rate = 0.0;     // m/s, negative while approaching
  double central_angle = 0.0;  // rad, between user and satellite position vectors
  Vec3 line_of_sight = Vec3::UnitZ();  // unit vector user -> satellite
};

struct ChannelParams {
  double path_gain = 1.0;  // linear power gain L
  double delay = 0.0;      // s
  double doppler = 0.0;    // Hz
  double phase = 0.0;      // rad, [0, 2pi)
  double slant_range = 0.0;  // m
};

/// Quasi-uniform user grid on the sphere (golden-angle spiral).
inline std::vector<UserLocation> fibonacci_lattice(std::size_t n) {
  if (n == 0) fail(ErrorCode::kInvalidArgument, "fibonacci_lattice: n must be >= 1");
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<UserLocation> users(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    double lon = std::fmod(kTwoPi * static_cast<double>(i) / golden, kTwoPi);
    if (lon >= kPi) lon -= kTwoPi;
    users[i] = {static_cast<int>(i), std::asin(z), lon, 0.0};
  }
  return users;
}

namespace detail {

struct OrbitSlot {
  double raan;
  double arg_latitude0;
};

inline OrbitSlot orbit_slot(const ShellConfig& shell, int sat_id) {
  if (sat_id < 0 || sat_id >= shell.size()) {
    fail(ErrorCode::kInvalidArgument, "unknown sat_id " + std::to_string(sat_id));
  }
  const int plane = sat_id / shell.sats_per_plane;
  const int slot = sat_id % shell.sats_per_plane;
  const double total = static_cast<double>(shell.size());
  return {kTwoPi * plane / shell.plane_count,
          kTwoPi * slot / shell.sats_per_plane + kTwoPi * shell.phasing * plane / total};
}

}  // namespace detail

/// Earth-centred inertial state; coincides with ECEF at t = 0.
inline SatelliteState inertial_state(const ShellConfig& shell, int sat_id, double t) {
  if (!(t >= 0.0)) fail(ErrorCode::kInvalidArgument, "propagate: t must be >= 0");
  const auto [raan, u0] = detail::orbit_slot(shell, sat_id);
  const double r = shell.radius();
  const double n = shell.mean_motion();
  const double u = u0 + n * t;
  const double cu = std::cos(u), su = std::sin(u);
  const double co = std::cos(raan), so = std::sin(raan);
  const double ci = std::cos(shell.inclination), si = std::sin(shell.inclination);
  SatelliteState s;
  s.sat_id = sat_id;
  s.epoch = t;
  s.position = r * Vec3(cu * co - su * ci * so, cu * so + su * ci * co, su * si);
  s.velocity = r * n * Vec3(-su * co - cu * ci * so, -su * so + cu * ci * co, cu * si);
  return s;
}

/// Earth-fixed state. Velocity is relative to the rotating Earth.
inline SatelliteState propagate(const ShellConfig& shell, int sat_id, double t) {
  const SatelliteState eci = inertial_state(shell, sat_id, t);
  const double g = kEarthRotationRate * t;
  const double cg = std::cos(g), sg = std::sin(g);
  auto rotate = [&](const Vec3& v) { return Vec3(cg * v.x() + sg * v.y(), -sg * v.x() + cg * v.y(), v.z()); };
  SatelliteState s = eci;
  s.position = rotate(eci.position);
  const Vec3 v = rotate(eci.velocity);
  s.velocity = Vec3(v.x() + kEarthRotationRate * s.position.y(), v.y() - kEarthRotationRate * s.position.x(), v.z());
  return s;
}

/// Look angles from a static user.
inline LookGeometry look_geometry(const Vec3& user_ecef, const SatelliteState& sat) {
  const Vec3 d = sat.position - user_ecef;
  const double rho = d.norm();
  if (!(rho > 1e-6)) fail(ErrorCode::kInvalidGeometry, "look_geometry: coincident user and satellite");
  LookGeometry g;
  g.slant_range = rho;
  g.line_of_sight = d / rho;
  const double ru = user_ecef.norm();
  const Vec3 up = ru > 0.0 ? Vec3(user_ecef / ru) : Vec3::UnitZ();
  g.elevation = std::asin(std::clamp(g.line_of_sight.dot(up), -1.0, 1.0));
  g.range_rate = g.line_of_sight.dot(sat.velocity);
  const double cos_central = ru > 0.0 ? up.dot(sat.position.normalized()) : 1.0;
  g.central_angle = std::acos(std::clamp(cos_central, -1.0, 1.0));
  return g;
}

inline LookGeometry look_geometry(const UserLocation& user, const SatelliteState& sat) {
  return look_geometry(user.ecef(), sat);
}

/// Slant range at the edge of the useful field of view for an elevation mask.
inline double max_slant_range(double altitude, double mask) {
  if (!(altitude > 0.0)) fail(ErrorCode::kInvalidArgument, "max_slant_range: altitude must be positive");
  if (!(mask >= 0.0 && mask <= kPi / 2)) fail(ErrorCode::kInvalidArgument, "max_slant_range: mask outside [0, pi/2]");
  // The closed form degenerates to 0/0 at the zenith.
  if (kPi / 2 - mask < 1e-12) return altitude;
  const double r = kEarthRadius + altitude;
  const double psi = -mask - std::asin(kEarthRadius * std::sin(kPi / 2 + mask) / r);
  return r * std::sin(kPi / 2 + psi) / std::sin(kPi / 2 + mask);
}

/// Free-space gain, delay and Doppler for a link; the carrier phase is drawn from `rng`.
template <class Rng>
ChannelParams channel_params(const LookGeometry& geom, double carrier_hz, Rng& rng) {
  if (!(geom.slant_range > 0.0)) fail(ErrorCode::kInvalidArgument, "channel_params: slant range must be positive");
  if (!(carrier_hz > 0.0)) fail(ErrorCode::kInvalidArgument, "channel_params: carrier must be positive");
  ChannelParams p;
  p.slant_range = geom.slant_range;
  const double a = kSpeedOfLight / (4.0 * kPi * carrier_hz * geom.slant_range);
  p.path_gain = a * a;
  p.delay = geom.slant_range / kSpeedOfLight;
  p.doppler = -(carrier_hz / kSpeedOfLight) * geom.range_rate;
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  p.phase = phase(rng);
  if (p.phase >= kTwoPi) p.phase = 0.0;
  return p;
}

struct VisibleSatellite {
  int sat_id = 0;
  LookGeometry look;
  SatelliteState state;
};

struct VisibleSet {
  std::vector<VisibleSatellite> satellites;  // elevation descending, then sat_id ascending
  bool sufficient = false;                   // true when the requested count was reached
};

inline void sort_by_elevation(std::vector<VisibleSatellite>& sats) {
  std::sort(sats.begin(), sats.end(), [](const VisibleSatellite& a, const VisibleSatellite& b) {
    if (a.look.elevation != b.look.elevation) return a.look.elevation > b.look.elevation;
    return a.sat_id < b.sat_id;
  });
}

/// Keeps at most `count` satellites above `mask`, highest elevation first.
inline VisibleSet select_visible(std::vector<VisibleSatellite> candidates, double mask, std::size_t count) {
  if (count == 0) fail(ErrorCode::kInvalidArgument, "visible_set: satellite count must be >= 1");
  std::erase_if(candidates, [mask](const VisibleSatellite& s) { return s.look.elevation < mask; });
  sort_by_elevation(candidates);
  VisibleSet out;
  out.sufficient = candidates.size() >= count;
  if (candidates.size() > count) candidates.resize(count);
  out.satellites = std::move(candidates);
  return out;
}

inline VisibleSet visible_set(const UserLocation& user, const ShellConfig& shell, double t, double mask,
                              std::size_t count) {
  const Vec3 ue = user.ecef();
  const Vec3 up = ue.normalized();
  std::vector<VisibleSatellite> candidates;
  for (int id = 0; id < shell.size(); ++id) {
    SatelliteState s = propagate(shell, id, t);
    // Cheap horizon reject before the full look computation.
    if ((s.position - ue).dot(up) < 0.0 && mask >= 0.0) continue;
    candidates.push_back({id, look_geometry(ue, s), s});
  }
  return select_visible(std::move(candidates), mask, count);
}

}  // namespace ntnprs
