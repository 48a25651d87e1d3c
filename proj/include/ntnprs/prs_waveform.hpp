#pragma once

// PRS sequence generation, comb mapping and CP-OFDM modulation.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ntnprs/constants.hpp"
#include "ntnprs/error.hpp"
#include "ntnprs/fft.hpp"
#include "ntnprs/format.hpp"

namespace ntnprs {

using cplx = std::complex<double>;

enum class SequenceKind { kGold, kSeededQpsk };

struct PrsConfig {
  int symbols = 12;          // m
  int comb_size = 4;         // cs
  int subcarriers = 288;     // N_SCS
  double scs_hz = 30.0e3;    // subcarrier spacing
  double ptx_dbw = 30.0;     // transmit power
  int n_id = 0;              // sequence identity
  int comb_offset = 0;       // k_offset
  int fft_size = 512;
  int cp_length = 36;
  int slot = 0;              // n_s
  SequenceKind sequence = SequenceKind::kGold;
  std::uint64_t sequence_seed = 0;  // kSeededQpsk only

  [[nodiscard]] double ptx_watts() const { return std::pow(10.0, ptx_dbw / 10.0); }
  [[nodiscard]] double sample_rate() const { return fft_size * scs_hz; }
  [[nodiscard]] int symbol_length() const { return fft_size + cp_length; }
  [[nodiscard]] std::size_t burst_length() const {
    return static_cast<std::size_t>(symbols) * static_cast<std::size_t>(symbol_length());
  }
  [[nodiscard]] int occupied_per_symbol() const { return subcarriers / comb_size; }

  void validate() const {
    if (symbols < 1 || symbols > 12) fail(ErrorCode::kInvalidArgument, "prs: symbol count must be in [1, 12]");
    if (comb_size != 4 && comb_size != 6 && comb_size != 12) {
      fail(ErrorCode::kInvalidArgument, "prs: comb size must be 4, 6 or 12");
    }
    if (subcarriers < comb_size || subcarriers % comb_size != 0) {
      fail(ErrorCode::kInvalidArgument, "prs: comb size must divide the subcarrier count");
    }
    if (comb_offset < 0 || comb_offset >= comb_size) fail(ErrorCode::kInvalidArgument, "prs: comb offset");
    if (fft_size < subcarriers) fail(ErrorCode::kInvalidArgument, "prs: FFT smaller than the occupied band");
    if (cp_length < 0 || cp_length > fft_size) fail(ErrorCode::kInvalidArgument, "prs: cyclic prefix length");
    if (!(scs_hz > 0.0)) fail(ErrorCode::kInvalidArgument, "prs: subcarrier spacing must be positive");
    if (!std::isfinite(ptx_dbw)) fail(ErrorCode::kInvalidArgument, "prs: transmit power must be finite");
    if (n_id < 0 || n_id > 4095) fail(ErrorCode::kInvalidArgument, "prs: sequence id must be in [0, 4095]");
    if (slot < 0) fail(ErrorCode::kInvalidArgument, "prs: slot index");
  }
};

/// Length-31 Gold sequence c(n), n in [0, length).
inline std::vector<std::uint8_t> gold_sequence(std::uint32_t c_init, std::size_t length) {
  if (c_init >= (1u << 31)) fail(ErrorCode::kInvalidArgument, "gold_sequence: c_init must be < 2^31");
  constexpr std::size_t kNc = 1600;
  const std::size_t total = kNc + length + 31;
  std::vector<std::uint8_t> x1(total, 0), x2(total, 0);
  x1[0] = 1;
  for (std::size_t i = 0; i < 31; ++i) x2[i] = static_cast<std::uint8_t>((c_init >> i) & 1u);
  for (std::size_t n = 0; n + 31 < total; ++n) {
    x1[n + 31] = (x1[n + 3] + x1[n]) & 1u;
    x2[n + 31] = (x2[n + 3] + x2[n + 2] + x2[n + 1] + x2[n]) & 1u;
  }
  std::vector<std::uint8_t> c(length);
  for (std::size_t n = 0; n < length; ++n) c[n] = (x1[n + kNc] + x2[n + kNc]) & 1u;
  return c;
}

/// Standard PRS scrambler initialisation for sequence id, slot and symbol.
inline std::uint32_t prs_c_init(int n_id, int slot, int symbol) {
  constexpr std::uint64_t kSymbolsPerSlot = 14;
  const auto id = static_cast<std::uint64_t>(n_id);
  const std::uint64_t v = (std::uint64_t{1} << 22) * (id / 1024) +
                          (std::uint64_t{1} << 10) * (kSymbolsPerSlot * static_cast<std::uint64_t>(slot) +
                                                      static_cast<std::uint64_t>(symbol) + 1) *
                              (2 * (id % 1024) + 1) +
                          (id % 1024);
  return static_cast<std::uint32_t>(v % (std::uint64_t{1} << 31));
}

/// QPSK mapping of consecutive bit pairs.
inline std::vector<cplx> qpsk_map(std::span<const std::uint8_t> bits) {
  const double a = 1.0 / std::sqrt(2.0);
  std::vector<cplx> out(bits.size() / 2);
  for (std::size_t q = 0; q < out.size(); ++q) {
    out[q] = {a * (1.0 - 2.0 * bits[2 * q]), a * (1.0 - 2.0 * bits[2 * q + 1])};
  }
  return out;
}

inline std::vector<cplx> qpsk_sequence(std::uint32_t c_init, std::size_t count) {
  const auto bits = gold_sequence(c_init, 2 * count);
  return qpsk_map(bits);
}

/// PRS symbols for one OFDM symbol; one entry per occupied resource element.
inline std::vector<cplx> prs_symbols(const PrsConfig& config, int symbol, int slot) {
  if (symbol < 0 || symbol >= config.symbols) fail(ErrorCode::kInvalidArgument, "prs_symbols: symbol index");
  const auto count = static_cast<std::size_t>(config.occupied_per_symbol());
  if (config.sequence == SequenceKind::kGold) {
    return qpsk_sequence(prs_c_init(config.n_id, slot, symbol), count);
  }
  std::seed_seq seq{static_cast<std::uint32_t>(config.sequence_seed), static_cast<std::uint32_t>(config.sequence_seed >> 32),
                    static_cast<std::uint32_t>(config.n_id), static_cast<std::uint32_t>(slot),
                    static_cast<std::uint32_t>(symbol)};
  std::mt19937_64 rng(seq);
  std::vector<std::uint8_t> bits(2 * count);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
  return qpsk_map(bits);
}

/// Per-symbol relative comb offsets for a comb size.
inline std::span<const int> comb_pattern(int comb_size) {
  static constexpr std::array<int, 4> k4{0, 2, 1, 3};
  static constexpr std::array<int, 6> k6{0, 3, 1, 4, 2, 5};
  static constexpr std::array<int, 12> k12{0, 6, 3, 9, 1, 7, 4, 10, 2, 8, 5, 11};
  switch (comb_size) {
    case 4: return k4;
    case 6: return k6;
    case 12: return k12;
    default: fail(ErrorCode::kInvalidArgument, "comb_pattern: unsupported comb size");
  }
}

inline bool on_comb(const PrsConfig& config, int symbol, int subcarrier) {
  const auto pattern = comb_pattern(config.comb_size);
  const int cs = config.comb_size;
  const int shift = pattern[static_cast<std::size_t>(symbol % cs)];
  return ((subcarrier - config.comb_offset - shift) % cs + cs) % cs == 0;
}

struct ResourceGrid {
  int symbols = 0;
  int subcarriers = 0;
  std::vector<cplx> values;            // row-major, symbol x subcarrier
  std::vector<std::uint8_t> occupied;  // same layout

  ResourceGrid() = default;
  ResourceGrid(int m, int n)
      : symbols(m), subcarriers(n),
        values(static_cast<std::size_t>(m) * static_cast<std::size_t>(n)),
        occupied(values.size(), 0) {}

  [[nodiscard]] std::size_t index(int l, int k) const {
    return static_cast<std::size_t>(l) * static_cast<std::size_t>(subcarriers) + static_cast<std::size_t>(k);
  }
  [[nodiscard]] cplx at(int l, int k) const { return values[index(l, k)]; }
  [[nodiscard]] bool is_occupied(int l, int k) const { return occupied[index(l, k)] != 0; }
  [[nodiscard]] std::size_t occupied_count() const {
    return static_cast<std::size_t>(std::count(occupied.begin(), occupied.end(), std::uint8_t{1}));
  }
};

struct BasebandSignal {
  std::vector<cplx> samples;
  double sample_rate = 0.0;  // Hz
  double t0 = 0.0;           // s, epoch of samples[0]

  [[nodiscard]] std::size_t size() const { return samples.size(); }
  [[nodiscard]] double energy() const {
    return std::accumulate(samples.begin(), samples.end(), 0.0,
                           [](double acc, const cplx& v) { return acc + std::norm(v); });
  }
  [[nodiscard]] double mean_power() const { return samples.empty() ? 0.0 : energy() / samples.size(); }
};

namespace detail {

// Unitary IFFT per symbol with centred subcarrier placement and cyclic prefix.
inline BasebandSignal modulate_unscaled(const ResourceGrid& grid, const PrsConfig& config) {
  const int n_fft = config.fft_size;
  const int n_cp = config.cp_length;
  const int half = grid.subcarriers / 2;
  const double norm = 1.0 / std::sqrt(static_cast<double>(n_fft));
  BasebandSignal out;
  out.sample_rate = config.sample_rate();
  out.samples.resize(static_cast<std::size_t>(grid.symbols) * static_cast<std::size_t>(n_fft + n_cp));
  std::vector<cplx> bins(static_cast<std::size_t>(n_fft));
  for (int l = 0; l < grid.symbols; ++l) {
    std::fill(bins.begin(), bins.end(), cplx{});
    for (int k = 0; k < grid.subcarriers; ++k) {
      const int bin = ((k - half) % n_fft + n_fft) % n_fft;
      bins[static_cast<std::size_t>(bin)] = grid.at(l, k);
    }
    fft::backward(bins);
    auto* dst = out.samples.data() + static_cast<std::size_t>(l) * static_cast<std::size_t>(n_fft + n_cp);
    for (int n = 0; n < n_cp; ++n) dst[n] = norm * bins[static_cast<std::size_t>(n_fft - n_cp + n)];
    for (int n = 0; n < n_fft; ++n) dst[n_cp + n] = norm * bins[static_cast<std::size_t>(n)];
  }
  return out;
}

}  // namespace detail

/// Comb-mapped PRS grid, amplitude chosen so the modulated burst has mean power P_TX.
inline ResourceGrid map_resource_grid(const PrsConfig& config) {
  config.validate();
  ResourceGrid grid(config.symbols, config.subcarriers);
  for (int l = 0; l < config.symbols; ++l) {
    const auto seq = prs_symbols(config, l, config.slot);
    std::size_t q = 0;
    for (int k = 0; k < config.subcarriers; ++k) {
      if (!on_comb(config, l, k)) continue;
      grid.values[grid.index(l, k)] = seq[q++];
      grid.occupied[grid.index(l, k)] = 1;
    }
  }
  const double raw_power = detail::modulate_unscaled(grid, config).mean_power();
  const double amplitude = std::sqrt(config.ptx_watts() / raw_power);
  for (auto& v : grid.values) v *= amplitude;
  return grid;
}

/// CP-OFDM modulation; the output is rescaled to mean power P_TX.
inline BasebandSignal ofdm_modulate(const ResourceGrid& grid, const PrsConfig& config) {
  if (grid.subcarriers != config.subcarriers || grid.symbols < 1) {
    fail(ErrorCode::kInvalidArgument, "ofdm_modulate: grid does not match configuration");
  }
  BasebandSignal out = detail::modulate_unscaled(grid, config);
  const double power = out.mean_power();
  if (power > 0.0) {
    const double g = std::sqrt(config.ptx_watts() / power);
    for (auto& v : out.samples) v *= g;
  }
  return out;
}

/// Strips the cyclic prefix and returns the subcarrier values of each symbol.
inline ResourceGrid ofdm_demodulate(const BasebandSignal& signal, const PrsConfig& config, std::size_t offset = 0) {
  const int n_fft = config.fft_size;
  const int n_cp = config.cp_length;
  const int half = config.subcarriers / 2;
  const auto sym_len = static_cast<std::size_t>(n_fft + n_cp);
  const auto m = static_cast<int>((signal.size() - offset) / sym_len);
  ResourceGrid grid(m, config.subcarriers);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n_fft));
  std::vector<cplx> bins(static_cast<std::size_t>(n_fft));
  for (int l = 0; l < m; ++l) {
    const auto* src = signal.samples.data() + offset + static_cast<std::size_t>(l) * sym_len + n_cp;
    std::copy(src, src + n_fft, bins.begin());
    fft::forward(bins);
    for (int k = 0; k < config.subcarriers; ++k) {
      const int bin = ((k - half) % n_fft + n_fft) % n_fft;
      grid.values[grid.index(l, k)] = norm * bins[static_cast<std::size_t>(bin)];
    }
  }
  return grid;
}

/// Occupied resource elements as `symbol,subcarrier,re,im`.
inline void write_grid_csv(std::ostream& os, const ResourceGrid& grid) {
  os << "symbol,subcarrier,re,im\n";
  for (int l = 0; l < grid.symbols; ++l) {
    for (int k = 0; k < grid.subcarriers; ++k) {
      if (!grid.is_occupied(l, k)) continue;
      const cplx v = grid.at(l, k);
      os << l << ',' << k << ',' << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
    }
  }
}

}  // namespace ntnprs
