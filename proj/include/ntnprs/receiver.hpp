#pragma once

// Matched-filter receiver: cross-ambiguity function, delay-Doppler map, and the
// interference / SINR seen at the peak of the satellite of interest.
//
// Correlation scaling: the replica is the transmitted burst itself (it carries
// sqrt(P_TX)) with its cyclic-prefix samples gated out, and correlations are
// divided by the number of gated-in samples. A clean link then peaks at
// P_TX^2 * L, and interference powers are absolute watts at that scale.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ntnprs/channel.hpp"
#include "ntnprs/constants.hpp"
#include "ntnprs/error.hpp"
#include "ntnprs/fft.hpp"
#include "ntnprs/format.hpp"
#include "ntnprs/prs_waveform.hpp"

namespace ntnprs {

inline constexpr double kInterferenceFloorDbw = -400.0;

enum SampleFlags : std::uint32_t {
  kFlagNone = 0,
  kFlagFloor = 1u << 0,             // exact-zero interference stored at the floor
  kFlagDopplerOutsideWindow = 1u << 1,  // a differential Doppler exceeds the search window
};

struct Replica {
  std::vector<cplx> samples;  // transmitted burst with cyclic prefixes zeroed
  std::size_t active = 0;     // samples taking part in the correlation
  double sample_rate = 0.0;

  [[nodiscard]] std::size_t size() const { return samples.size(); }
};

inline Replica make_replica(const BasebandSignal& transmit, const PrsConfig& config) {
  const auto sym_len = static_cast<std::size_t>(config.symbol_length());
  const auto n_cp = static_cast<std::size_t>(config.cp_length);
  Replica r;
  r.sample_rate = transmit.sample_rate;
  r.samples = transmit.samples;
  for (std::size_t n = 0; n < r.samples.size(); ++n) {
    if (n % sym_len < n_cp) {
      r.samples[n] = {};
    } else {
      ++r.active;
    }
  }
  return r;
}

struct DopplerGrid {
  double first = -40.0e3;  // Hz
  double step = 500.0;     // Hz
  std::size_t count = 161;

  static DopplerGrid symmetric(double max_hz, double step_hz) {
    if (!(step_hz > 0.0) || !(max_hz >= 0.0)) fail(ErrorCode::kInvalidArgument, "doppler grid: bad extent");
    const auto half = static_cast<std::size_t>(std::llround(max_hz / step_hz));
    return {-static_cast<double>(half) * step_hz, step_hz, 2 * half + 1};
  }

  [[nodiscard]] double at(std::size_t i) const { return first + step * static_cast<double>(i); }
  [[nodiscard]] double last() const { return at(count - 1); }
  [[nodiscard]] bool contains(double hz) const { return hz >= first - step / 2 && hz <= last() + step / 2; }
  [[nodiscard]] std::size_t nearest(double hz) const {
    const double idx = std::round((hz - first) / step);
    return static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(count - 1)));
  }
};

struct DelayDopplerMap {
  std::vector<double> delay_axis;    // s, receiver epoch + lag / fs
  std::vector<double> doppler_axis;  // Hz
  std::vector<double> values;        // |chi|^2 in W, row-major doppler x delay

  [[nodiscard]] std::size_t delays() const { return delay_axis.size(); }
  [[nodiscard]] std::size_t dopplers() const { return doppler_axis.size(); }
  [[nodiscard]] double at(std::size_t doppler_index, std::size_t lag) const {
    return values[doppler_index * delays() + lag];
  }

  struct Peak {
    std::size_t doppler_index = 0;
    std::size_t lag = 0;
    double value = 0.0;
  };

  [[nodiscard]] Peak peak() const {
    const auto it = std::max_element(values.begin(), values.end());
    const auto flat = static_cast<std::size_t>(it - values.begin());
    return {flat / delays(), flat % delays(), *it};
  }
};

/// |CAF|^2 of `y` against `replica` over every integer lag of the buffer and each Doppler hypothesis.
inline DelayDopplerMap caf(std::span<const cplx> y, double sample_rate, double epoch, const Replica& replica,
                           const DopplerGrid& grid) {
  if (y.empty() || replica.samples.empty() || grid.count == 0) fail(ErrorCode::kInvalidArgument, "caf: empty grid");
  if (replica.size() > y.size()) fail(ErrorCode::kInvalidArgument, "caf: replica longer than the buffer");
  if (replica.active == 0) fail(ErrorCode::kInvalidArgument, "caf: replica has no active samples");
  const std::size_t len = y.size();
  const std::size_t nfft = fft::next_pow2(len + replica.size());
  std::vector<cplx> ref(nfft);
  std::copy(replica.samples.begin(), replica.samples.end(), ref.begin());
  fft::forward(ref);
  for (auto& v : ref) v = std::conj(v);

  DelayDopplerMap map;
  map.delay_axis.resize(len);
  for (std::size_t n = 0; n < len; ++n) map.delay_axis[n] = epoch + static_cast<double>(n) / sample_rate;
  map.doppler_axis.resize(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) map.doppler_axis[i] = grid.at(i);
  map.values.resize(grid.count * len);

  const double scale = 1.0 / (static_cast<double>(replica.active) * static_cast<double>(nfft));
  std::vector<cplx> work(nfft);
  for (std::size_t i = 0; i < grid.count; ++i) {
    const double w = -kTwoPi * grid.at(i) / sample_rate;
    std::fill(work.begin(), work.end(), cplx{});
    for (std::size_t n = 0; n < len; ++n) work[n] = y[n] * std::polar(1.0, w * static_cast<double>(n));
    fft::forward(work);
    for (std::size_t k = 0; k < nfft; ++k) work[k] *= ref[k];
    fft::backward(work);
    double* row = map.values.data() + i * len;
    for (std::size_t lag = 0; lag < len; ++lag) row[lag] = std::norm(work[lag] * scale);
  }
  return map;
}

inline DelayDopplerMap caf(const ReceivedComposite& y, const Replica& replica, const DopplerGrid& grid) {
  return caf(y.samples, y.sample_rate, y.epoch, replica, grid);
}

struct Contribution {
  int sat_id = 0;
  double delta_delay = 0.0;    // s, tau_i - tau_s
  double delta_doppler = 0.0;  // Hz, nu_i - nu_s
  double power = 0.0;          // W
};

struct InterferenceSample {
  double interference = 0.0;  // W
  double interference_dbw = kInterferenceFloorDbw;
  std::vector<Contribution> contributions;
  int sat_of_interest = 0;
  std::uint32_t flags = kFlagNone;
  // provenance, filled by the campaign driver
  int symbols = 0;
  int comb_size = 0;
  double ptx_dbw = 0.0;
  int user_id = 0;
  int iteration = 0;
  int sweep_index = 0;
  double epoch = 0.0;  // s, pass time of the draw
};

struct InterferenceOptions {
  double doppler_max = 40.0e3;  // Hz, search half-window used for flagging
};

/// Correlation of one received link against a replica counter-rotated to `doppler`, at one lag.
inline cplx correlate_at(std::span<const cplx> received, std::size_t lag, const Replica& replica, double doppler,
                         double sample_rate) {
  if (lag + replica.size() > received.size()) fail(ErrorCode::kInvalidArgument, "correlate_at: lag out of range");
  const double w = -kTwoPi * doppler / sample_rate;
  cplx acc{};
  for (std::size_t n = 0; n < replica.size(); ++n) {
    const cplx& r = replica.samples[n];
    if (r == cplx{}) continue;
    acc += received[lag + n] * std::conj(r) * std::polar(1.0, w * static_cast<double>(lag + n));
  }
  return acc / static_cast<double>(replica.active);
}

/// Interference at the matched-filter peak of link `i`: each other link correlated against
/// link i's replica at link i's lag and Doppler.
inline InterferenceSample interference_sample(const Reception& rx, const Replica& replica, std::size_t i,
                                              const InterferenceOptions& opt = {}) {
  const auto& truth = rx.composite.truth;
  if (i >= truth.size() || i >= rx.received.size()) fail(ErrorCode::kInvalidArgument, "interference_sample: index");
  const auto& self = truth[i];
  const double fs = rx.composite.sample_rate;

  // Counter-rotated, conjugated replica reused for every interferer.
  std::vector<cplx> kernel(replica.size());
  const double w = -kTwoPi * self.params.doppler / fs;
  for (std::size_t n = 0; n < replica.size(); ++n) {
    if (replica.samples[n] == cplx{}) continue;
    kernel[n] = std::conj(replica.samples[n]) * std::polar(1.0, w * static_cast<double>(self.delay_samples + n));
  }

  InterferenceSample out;
  out.sat_of_interest = self.sat_id;
  for (std::size_t s = 0; s < truth.size(); ++s) {
    if (s == i) continue;
    const auto& y = rx.received[s].samples;
    if (self.delay_samples + replica.size() > y.size()) {
      fail(ErrorCode::kInvalidArgument, "interference_sample: buffer shorter than the replica window");
    }
    cplx acc{};
    for (std::size_t n = 0; n < kernel.size(); ++n) acc += y[self.delay_samples + n] * kernel[n];
    acc /= static_cast<double>(replica.active);
    Contribution c;
    c.sat_id = truth[s].sat_id;
    c.delta_delay = self.params.delay - truth[s].params.delay;
    c.delta_doppler = self.params.doppler - truth[s].params.doppler;
    c.power = std::norm(acc);
    if (std::abs(c.delta_doppler) > opt.doppler_max) out.flags |= kFlagDopplerOutsideWindow;
    out.interference += c.power;
    out.contributions.push_back(c);
  }
  if (out.interference > 0.0) {
    out.interference_dbw = to_db(out.interference);
  } else {
    out.interference_dbw = kInterferenceFloorDbw;
    out.flags |= kFlagFloor;
  }
  return out;
}

/// SINR at the matched-filter peak: L_i P / (I / P + sigma^2), I in matched-filter watts.
inline double sinr(const InterferenceSample& sample, double path_gain, double ptx_watts, double noise_variance) {
  const double denom = sample.interference / ptx_watts + noise_variance;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return path_gain * ptx_watts / denom;
}

inline double sinr(const Reception& rx, const Replica& replica, std::size_t i, double ptx_watts,
                   double noise_variance) {
  const auto sample = interference_sample(rx, replica, i);
  return sinr(sample, rx.composite.truth[i].params.path_gain, ptx_watts, noise_variance);
}

/// Binary dump: "NTNDDM01", u64 delays, u64 dopplers, delay axis, Doppler axis, values (f64, little endian).
inline void write_ddm_binary(std::ostream& os, const DelayDopplerMap& map) {
  os.write("NTNDDM01", 8);
  const std::uint64_t nd = map.delays(), nf = map.dopplers();
  os.write(reinterpret_cast<const char*>(&nd), sizeof nd);
  os.write(reinterpret_cast<const char*>(&nf), sizeof nf);
  os.write(reinterpret_cast<const char*>(map.delay_axis.data()), static_cast<std::streamsize>(nd * sizeof(double)));
  os.write(reinterpret_cast<const char*>(map.doppler_axis.data()), static_cast<std::streamsize>(nf * sizeof(double)));
  os.write(reinterpret_cast<const char*>(map.values.data()),
           static_cast<std::streamsize>(map.values.size() * sizeof(double)));
}

/// Long-format CSV `delay_s,doppler_hz,value_w` over a lag window.
inline void write_ddm_csv(std::ostream& os, const DelayDopplerMap& map, std::size_t lag_begin = 0,
                          std::size_t lag_end = std::numeric_limits<std::size_t>::max()) {
  lag_end = std::min(lag_end, map.delays());
  os << "delay_s,doppler_hz,value_w\n";
  for (std::size_t f = 0; f < map.dopplers(); ++f) {
    for (std::size_t lag = lag_begin; lag < lag_end; ++lag) {
      os << format_double(map.delay_axis[lag]) << ',' << format_double(map.doppler_axis[f]) << ','
         << format_double(map.at(f, lag)) << '\n';
    }
  }
}

}  // namespace ntnprs
