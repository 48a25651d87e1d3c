#pragma once

// Satellite pass tables: per user, the states of every satellite above the mask at each
// time step. Stands in for an external ephemeris dataset and round-trips through CSV.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ntnprs/constants.hpp"
#include "ntnprs/error.hpp"
#include "ntnprs/format.hpp"
#include "ntnprs/geometry.hpp"

namespace ntnprs {

inline constexpr const char* kPassHeader = "user_id,t_s,sat_id,x_m,y_m,z_m,vx_mps,vy_mps,vz_mps";

struct PassRow {
  int user_id = 0;
  double t = 0.0;
  SatelliteState state;

  friend bool operator==(const PassRow& a, const PassRow& b) {
    return a.user_id == b.user_id && a.t == b.t && a.state.sat_id == b.state.sat_id &&
           a.state.position == b.state.position && a.state.velocity == b.state.velocity;
  }
};

/// Rows grouped by user, then by epoch.
class PassTable {
 public:
  struct Epoch {
    double t = 0.0;
    std::size_t begin = 0;  // row range
    std::size_t end = 0;
  };

  PassTable() = default;
  explicit PassTable(std::vector<PassRow> rows) : rows_(std::move(rows)) { reindex(); }

  [[nodiscard]] const std::vector<PassRow>& rows() const { return rows_; }
  [[nodiscard]] bool empty() const { return rows_.empty(); }
  [[nodiscard]] std::size_t size() const { return rows_.size(); }
  [[nodiscard]] std::size_t user_count() const { return index_.size(); }
  [[nodiscard]] bool has_user(int user_id) const { return index_.count(user_id) != 0; }

  [[nodiscard]] const std::vector<Epoch>& epochs(int user_id) const {
    const auto it = index_.find(user_id);
    if (it == index_.end()) fail(ErrorCode::kGeometryConfig, "pass table has no rows for user " + std::to_string(user_id));
    return it->second;
  }

  [[nodiscard]] std::span<const PassRow> at(const Epoch& e) const {
    return std::span<const PassRow>(rows_).subspan(e.begin, e.end - e.begin);
  }

  friend bool operator==(const PassTable& a, const PassTable& b) { return a.rows_ == b.rows_; }

 private:
  void reindex() {
    index_.clear();
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      auto& list = index_[rows_[r].user_id];
      if (list.empty() || list.back().t != rows_[r].t) {
        list.push_back({rows_[r].t, r, r + 1});
      } else {
        list.back().end = r + 1;
      }
    }
  }

  std::vector<PassRow> rows_;
  std::map<int, std::vector<Epoch>> index_;
};

/// Samples [0, span) at `step` and keeps every satellite at or above `mask` for each user.
inline PassTable generate_passes(std::span<const UserLocation> users, const ShellConfig& shell, double span,
                                 double step, double mask) {
  shell.validate();
  if (!(span > 0.0) || !(step > 0.0)) fail(ErrorCode::kInvalidArgument, "generate_passes: span and step must be positive");
  const auto steps = static_cast<std::size_t>(std::ceil(span / step - 1e-9));
  std::vector<std::vector<PassRow>> per_user(users.size());
  std::vector<SatelliteState> states(static_cast<std::size_t>(shell.size()));
  std::vector<Vec3> ecef(users.size());
  for (std::size_t u = 0; u < users.size(); ++u) ecef[u] = users[u].ecef();
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * step;
    for (int id = 0; id < shell.size(); ++id) states[static_cast<std::size_t>(id)] = propagate(shell, id, t);
    for (std::size_t u = 0; u < users.size(); ++u) {
      const Vec3 up = ecef[u].normalized();
      for (const auto& s : states) {
        if ((s.position - ecef[u]).dot(up) < 0.0 && mask >= 0.0) continue;
        if (look_geometry(ecef[u], s).elevation >= mask) per_user[u].push_back({users[u].id, t, s});
      }
    }
  }
  std::vector<PassRow> rows;
  for (auto& v : per_user) rows.insert(rows.end(), v.begin(), v.end());
  return PassTable(std::move(rows));
}

inline void write_passes_csv(std::ostream& os, const PassTable& table) {
  os << kPassHeader << '\n';
  for (const auto& r : table.rows()) {
    const auto& s = r.state;
    os << r.user_id << ',' << format_double(r.t) << ',' << s.sat_id;
    for (int i = 0; i < 3; ++i) os << ',' << format_double(s.position[i]);
    for (int i = 0; i < 3; ++i) os << ',' << format_double(s.velocity[i]);
    os << '\n';
  }
}

inline PassTable read_passes_csv(std::istream& in) {
  std::string line;
  std::vector<PassRow> rows;
  if (!std::getline(in, line)) return {};
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kPassHeader) fail(ErrorCode::kLoad, "pass CSV row 1: header mismatch, expected '" + std::string(kPassHeader) + "'");
  std::map<int, double> last_t;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = "pass CSV row " + std::to_string(row) + ": ";
    std::vector<double> f;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      double v = 0.0;
      const std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!parse_double(field, v)) fail(ErrorCode::kLoad, where + "unparseable field '" + field + "'");
      f.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 9) fail(ErrorCode::kLoad, where + "expected 9 fields, got " + std::to_string(f.size()));
    for (double v : f) {
      if (!std::isfinite(v)) fail(ErrorCode::kLoad, where + "non-finite field");
    }
    if (f[0] != std::floor(f[0]) || f[2] != std::floor(f[2]) || f[0] < 0 || f[2] < 0) {
      fail(ErrorCode::kLoad, where + "user_id and sat_id must be non-negative integers");
    }
    PassRow r;
    r.user_id = static_cast<int>(f[0]);
    r.t = f[1];
    r.state.sat_id = static_cast<int>(f[2]);
    r.state.position = {f[3], f[4], f[5]};
    r.state.velocity = {f[6], f[7], f[8]};
    r.state.epoch = r.t;
    const double radius = r.state.position.norm();
    if (radius < kEarthRadius || radius > kEarthRadius + 2000e3) {
      fail(ErrorCode::kLoad, where + "satellite radius " + format_double(radius) + " m outside [r_E, r_E + 2000 km]");
    }
    if (const auto it = last_t.find(r.user_id); it != last_t.end() && r.t < it->second) {
      fail(ErrorCode::kLoad, where + "time decreases for user " + std::to_string(r.user_id));
    }
    last_t[r.user_id] = r.t;
    rows.push_back(r);
  }
  // Users may be interleaved in the file; group them stably.
  std::stable_sort(rows.begin(), rows.end(), [](const PassRow& a, const PassRow& b) { return a.user_id < b.user_id; });
  return PassTable(std::move(rows));
}

inline PassTable load_passes(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open pass file '" + path + "'");
  return read_passes_csv(in);
}

}  // namespace ntnprs
