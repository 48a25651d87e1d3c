#pragma once

// Line-of-sight delay/Doppler/path-loss channel and the composite received signal.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "ntnprs/constants.hpp"
#include "ntnprs/error.hpp"
#include "ntnprs/geometry.hpp"
#include "ntnprs/prs_waveform.hpp"

namespace ntnprs {

/// What a transmitter emits outside its burst: silence, or the burst repeated back to back.
enum class Extension { kBurst, kPeriodic };

struct ChannelOptions {
  double epoch = 0.0;       // s, receiver time of output sample 0 on the transmit clock
  std::size_t length = 0;   // minimum output length in samples
  Extension extension = Extension::kBurst;
};

inline std::size_t quantized_delay_samples(double delay, double epoch, double fs) {
  const double d = std::round((delay - epoch) * fs);
  if (d < 0.0) fail(ErrorCode::kInvalidArgument, "apply_channel: link arrives before the receiver epoch");
  return static_cast<std::size_t>(d);
}

/// sqrt(L) e^{j(2 pi nu t + phase)} x(t - tau), with tau rounded to the sample grid and t
/// counted from the receiver epoch.
inline BasebandSignal apply_channel(const BasebandSignal& x, const ChannelParams& p, const ChannelOptions& opt = {}) {
  const double fs = x.sample_rate;
  if (!(fs > 0.0)) fail(ErrorCode::kInvalidArgument, "apply_channel: sample rate must be positive");
  if (std::abs(p.doppler) >= fs / 2.0) fail(ErrorCode::kAliasing, "apply_channel: Doppler exceeds Nyquist");
  if (!(p.path_gain >= 0.0)) fail(ErrorCode::kInvalidArgument, "apply_channel: negative path gain");
  const std::size_t n_src = x.size();
  const std::size_t d = quantized_delay_samples(p.delay, opt.epoch, fs);
  BasebandSignal out;
  out.sample_rate = fs;
  out.t0 = opt.epoch;
  out.samples.assign(std::max(n_src + d, opt.length), cplx{});
  if (n_src == 0) return out;
  const double amp = std::sqrt(p.path_gain);
  const double w = kTwoPi * p.doppler / fs;
  for (std::size_t n = 0; n < out.size(); ++n) {
    cplx src;
    if (n >= d && n - d < n_src) {
      src = x.samples[n - d];
    } else if (opt.extension == Extension::kPeriodic) {
      const auto period = static_cast<long long>(n_src);
      long long k = (static_cast<long long>(n) - static_cast<long long>(d)) % period;
      if (k < 0) k += period;
      src = x.samples[static_cast<std::size_t>(k)];
    } else {
      continue;
    }
    out.samples[n] = std::polar(amp, w * static_cast<double>(n) + p.phase) * src;
  }
  return out;
}

struct LinkTruth {
  int sat_id = 0;
  ChannelParams params;
  std::size_t delay_samples = 0;  // relative to the receiver epoch
  double quantized_delay = 0.0;   // s, epoch + delay_samples / fs
};

struct ReceivedComposite {
  std::vector<cplx> samples;
  double sample_rate = 0.0;
  double epoch = 0.0;  // s, earliest arrival
  double noise_variance = 0.0;
  std::vector<LinkTruth> truth;

  [[nodiscard]] std::size_t size() const { return samples.size(); }
};

/// Sums delayed signals into one buffer and adds complex white Gaussian noise.
template <class Rng>
ReceivedComposite combine(std::span<const BasebandSignal> signals, double noise_variance, Rng& rng,
                          double sample_rate = 0.0) {
  ReceivedComposite y;
  y.sample_rate = sample_rate;
  y.noise_variance = noise_variance;
  std::size_t len = 0;
  for (const auto& s : signals) {
    if (y.sample_rate == 0.0) y.sample_rate = s.sample_rate;
    if (s.sample_rate != y.sample_rate) fail(ErrorCode::kInvalidArgument, "combine: mismatched sample rates");
    len = std::max(len, s.size());
  }
  if (!signals.empty()) y.epoch = signals.front().t0;
  y.samples.assign(len, cplx{});
  for (const auto& s : signals) {
    for (std::size_t n = 0; n < s.size(); ++n) y.samples[n] += s.samples[n];
  }
  if (noise_variance > 0.0) {
    std::normal_distribution<double> g(0.0, std::sqrt(noise_variance / 2.0));
    for (auto& v : y.samples) v += cplx(g(rng), g(rng));
  }
  return y;
}

struct Link {
  int sat_id = 0;
  ChannelParams params;
  BasebandSignal transmit;
};

struct Reception {
  std::vector<BasebandSignal> received;  // per link, all on the common buffer
  ReceivedComposite composite;
};

// Periodic by default: differential delays reach ~1.5 ms, longer than a burst, and a
// silent interferer would put an exact zero into the interference statistic.
struct ReceptionOptions {
  Extension extension = Extension::kPeriodic;
  double noise_variance = 0.0;
};

/// Applies every link's channel relative to the earliest arrival and forms the composite.
template <class Rng>
Reception receive(std::span<const Link> links, const ReceptionOptions& opt, Rng& rng) {
  if (links.empty()) fail(ErrorCode::kInvalidArgument, "receive: no links");
  const double fs = links.front().transmit.sample_rate;
  double epoch = links.front().params.delay;
  for (const auto& l : links) {
    if (l.transmit.sample_rate != fs) fail(ErrorCode::kInvalidArgument, "receive: mismatched sample rates");
    epoch = std::min(epoch, l.params.delay);
  }
  std::size_t length = 0;
  std::vector<std::size_t> delays;
  for (const auto& l : links) {
    delays.push_back(quantized_delay_samples(l.params.delay, epoch, fs));
    length = std::max(length, l.transmit.size() + delays.back());
  }
  Reception r;
  r.received.reserve(links.size());
  for (const auto& l : links) {
    r.received.push_back(apply_channel(l.transmit, l.params, {epoch, length, opt.extension}));
  }
  r.composite = combine(std::span<const BasebandSignal>(r.received), opt.noise_variance, rng, fs);
  r.composite.epoch = epoch;
  for (std::size_t i = 0; i < links.size(); ++i) {
    r.composite.truth.push_back(
        {links[i].sat_id, links[i].params, delays[i], epoch + static_cast<double>(delays[i]) / fs});
  }
  return r;
}

}  // namespace ntnprs
