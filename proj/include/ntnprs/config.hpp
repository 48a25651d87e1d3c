#pragma once

// Campaign configuration: an INI-style file of `key = value` lines under
// `[section]` headers. Key names are unique across sections, so overrides may
// use either `section.key` or the bare key.

#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ntnprs/constants.hpp"
#include "ntnprs/error.hpp"
#include "ntnprs/format.hpp"
#include "ntnprs/geometry.hpp"
#include "ntnprs/prs_waveform.hpp"
#include "ntnprs/channel.hpp"

namespace ntnprs {

enum class PassSource { kInternal, kCsv };

struct SweepPoint {
  int symbols = 12;
  int comb_size = 4;
  double ptx_dbw = 30.0;

  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct CampaignConfig {
  // campaign
  std::size_t users = 10;
  std::size_t iterations = 100;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: hardware concurrency
  std::size_t retry_budget = 100;
  double span_s = 600.0;
  PassSource pass_source = PassSource::kInternal;
  std::string pass_file = "passes.csv";
  double pass_step_s = 1.0;

  // scenario
  ShellConfig shell;
  double mask = deg2rad(25.0);
  double carrier_hz = 2.2e9;
  std::size_t satellites = 4;

  // prs
  std::vector<int> symbols{12};
  std::vector<int> comb_sizes{4};
  std::vector<double> ptx_dbw{30.0};
  std::vector<SweepPoint> extra_points;
  int subcarriers = 288;
  double scs_hz = 30.0e3;
  int fft_size = 512;
  int cp_length = 36;
  SequenceKind sequence = SequenceKind::kGold;
  Extension transmission = Extension::kPeriodic;

  // receiver
  double doppler_max_hz = 40.0e3;
  double doppler_step_hz = 500.0;
  double noise_dbw = -1e300;  // "off"

  // fit
  std::size_t effective_n = 1000;
  std::size_t min_group = 50;
  double shift_db = 0.1;

  [[nodiscard]] bool noise_enabled() const { return noise_dbw > -1e299; }
  [[nodiscard]] double noise_variance() const { return noise_enabled() ? from_db(noise_dbw) : 0.0; }

  /// Cartesian product of the sweep lists followed by the extra points, duplicates removed.
  [[nodiscard]] std::vector<SweepPoint> sweep() const {
    std::vector<SweepPoint> pts;
    auto add = [&](const SweepPoint& p) {
      for (const auto& q : pts)
        if (q == p) return;
      pts.push_back(p);
    };
    for (int m : symbols)
      for (int cs : comb_sizes)
        for (double p : ptx_dbw) add({m, cs, p});
    for (const auto& p : extra_points) add(p);
    return pts;
  }

  [[nodiscard]] PrsConfig prs(const SweepPoint& point) const {
    PrsConfig c;
    c.symbols = point.symbols;
    c.comb_size = point.comb_size;
    c.ptx_dbw = point.ptx_dbw;
    c.subcarriers = subcarriers;
    c.scs_hz = scs_hz;
    c.fft_size = fft_size;
    c.cp_length = cp_length;
    c.sequence = sequence;
    c.sequence_seed = seed;
    return c;
  }

  void validate() const {
    auto bad = [](const std::string& what) { fail(ErrorCode::kConfig, "config: " + what); };
    if (users < 1) bad("users must be >= 1");
    if (iterations < 1) bad("iterations must be >= 1");
    if (!(span_s > 0.0)) bad("span_s must be positive");
    if (!(pass_step_s > 0.0)) bad("pass_step_s must be positive");
    if (!(carrier_hz > 0.0)) bad("carrier_hz must be positive");
    if (!(mask >= 0.0 && mask <= kPi / 2)) bad("mask_deg must be in [0, 90]");
    if (satellites < 2) bad("satellites must be >= 2");
    if (symbols.empty() || comb_sizes.empty() || ptx_dbw.empty()) bad("sweep lists must be non-empty");
    if (!(doppler_step_hz > 0.0) || !(doppler_max_hz >= 0.0)) bad("Doppler grid");
    if (min_group < 50) bad("min_group must be >= 50");
    try {
      shell.validate();
      for (const auto& p : sweep()) {
        PrsConfig c = prs(p);
        c.validate();
        if (static_cast<std::size_t>(c.comb_size) < satellites) bad("comb size smaller than the satellite count");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig) throw;
      bad(e.what());
    }
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double to_number(const std::string& key, const std::string& v) {
  double d = 0.0;
  if (!parse_double(v, d)) fail(ErrorCode::kConfig, "config: " + key + ": not a number: '" + v + "'");
  return d;
}

inline long long to_integer(const std::string& key, const std::string& v) {
  const double d = to_number(key, v);
  if (d != std::floor(d)) fail(ErrorCode::kConfig, "config: " + key + ": not an integer: '" + v + "'");
  return static_cast<long long>(d);
}

inline std::size_t to_count(const std::string& key, const std::string& v) {
  const long long n = to_integer(key, v);
  if (n < 0) fail(ErrorCode::kConfig, "config: " + key + ": must be non-negative");
  return static_cast<std::size_t>(n);
}

struct KeySpec {
  std::string section;
  std::function<void(CampaignConfig&, const std::string&)> set;
  std::function<std::string(const CampaignConfig&)> get;
};

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      s += format_double(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

// Ordered so that serialisation is stable.
inline const std::vector<std::pair<std::string, KeySpec>>& key_table() {
  using C = CampaignConfig;
  using S = const std::string&;
  static const std::vector<std::pair<std::string, KeySpec>> table = {
      {"users", {"campaign", [](C& c, S v) { c.users = to_count("users", v); },
                 [](const C& c) { return std::to_string(c.users); }}},
      {"iterations", {"campaign", [](C& c, S v) { c.iterations = to_count("iterations", v); },
                      [](const C& c) { return std::to_string(c.iterations); }}},
      {"seed", {"campaign",
                [](C& c, S v) {
                  try {
                    std::size_t pos = 0;
                    c.seed = std::stoull(v, &pos);
                    if (pos != v.size()) throw std::invalid_argument(v);
                  } catch (const std::exception&) {
                    fail(ErrorCode::kConfig, "config: seed: not an unsigned integer: '" + v + "'");
                  }
                },
                [](const C& c) { return std::to_string(c.seed); }}},
      {"threads", {"campaign", [](C& c, S v) { c.threads = to_count("threads", v); },
                   [](const C& c) { return std::to_string(c.threads); }}},
      {"retry_budget", {"campaign", [](C& c, S v) { c.retry_budget = to_count("retry_budget", v); },
                        [](const C& c) { return std::to_string(c.retry_budget); }}},
      {"span_s", {"campaign", [](C& c, S v) { c.span_s = to_number("span_s", v); },
                  [](const C& c) { return format_double(c.span_s); }}},
      {"pass_source", {"campaign",
                       [](C& c, S v) {
                         if (v == "internal") c.pass_source = PassSource::kInternal;
                         else if (v == "csv") c.pass_source = PassSource::kCsv;
                         else fail(ErrorCode::kConfig, "config: pass_source must be 'internal' or 'csv'");
                       },
                       [](const C& c) { return std::string(c.pass_source == PassSource::kCsv ? "csv" : "internal"); }}},
      {"pass_file", {"campaign", [](C& c, S v) { c.pass_file = v; }, [](const C& c) { return c.pass_file; }}},
      {"pass_step_s", {"campaign", [](C& c, S v) { c.pass_step_s = to_number("pass_step_s", v); },
                       [](const C& c) { return format_double(c.pass_step_s); }}},
      {"altitude_km", {"shell", [](C& c, S v) { c.shell.altitude = 1e3 * to_number("altitude_km", v); },
                       [](const C& c) { return format_double(c.shell.altitude / 1e3); }}},
      {"inclination_deg", {"shell", [](C& c, S v) { c.shell.inclination = deg2rad(to_number("inclination_deg", v)); },
                           [](const C& c) { return format_double(rad2deg(c.shell.inclination)); }}},
      {"planes", {"shell", [](C& c, S v) { c.shell.plane_count = static_cast<int>(to_integer("planes", v)); },
                  [](const C& c) { return std::to_string(c.shell.plane_count); }}},
      {"sats_per_plane", {"shell",
                          [](C& c, S v) { c.shell.sats_per_plane = static_cast<int>(to_integer("sats_per_plane", v)); },
                          [](const C& c) { return std::to_string(c.shell.sats_per_plane); }}},
      {"phasing", {"shell", [](C& c, S v) { c.shell.phasing = static_cast<int>(to_integer("phasing", v)); },
                   [](const C& c) { return std::to_string(c.shell.phasing); }}},
      {"mask_deg", {"scenario", [](C& c, S v) { c.mask = deg2rad(to_number("mask_deg", v)); },
                    [](const C& c) { return format_double(rad2deg(c.mask)); }}},
      {"carrier_hz", {"scenario", [](C& c, S v) { c.carrier_hz = to_number("carrier_hz", v); },
                      [](const C& c) { return format_double(c.carrier_hz); }}},
      {"satellites", {"scenario", [](C& c, S v) { c.satellites = to_count("satellites", v); },
                      [](const C& c) { return std::to_string(c.satellites); }}},
      {"symbols", {"prs",
                   [](C& c, S v) {
                     c.symbols.clear();
                     for (const auto& t : split(v, ',')) c.symbols.push_back(static_cast<int>(to_integer("symbols", t)));
                   },
                   [](const C& c) { return join(c.symbols); }}},
      {"comb_sizes", {"prs",
                      [](C& c, S v) {
                        c.comb_sizes.clear();
                        for (const auto& t : split(v, ','))
                          c.comb_sizes.push_back(static_cast<int>(to_integer("comb_sizes", t)));
                      },
                      [](const C& c) { return join(c.comb_sizes); }}},
      {"ptx_dbw", {"prs",
                   [](C& c, S v) {
                     c.ptx_dbw.clear();
                     for (const auto& t : split(v, ',')) c.ptx_dbw.push_back(to_number("ptx_dbw", t));
                   },
                   [](const C& c) { return join(c.ptx_dbw); }}},
      {"extra_points", {"prs",
                        [](C& c, S v) {
                          c.extra_points.clear();
                          if (v.empty()) return;
                          for (const auto& t : split(v, ',')) {
                            const auto f = split(t, ':');
                            if (f.size() != 3) fail(ErrorCode::kConfig, "config: extra_points entries are m:cs:ptx_dbw");
                            c.extra_points.push_back({static_cast<int>(to_integer("extra_points", f[0])),
                                                      static_cast<int>(to_integer("extra_points", f[1])),
                                                      to_number("extra_points", f[2])});
                          }
                        },
                        [](const C& c) {
                          std::string s;
                          for (std::size_t i = 0; i < c.extra_points.size(); ++i) {
                            if (i) s += ", ";
                            const auto& p = c.extra_points[i];
                            s += std::to_string(p.symbols) + ":" + std::to_string(p.comb_size) + ":" +
                                 format_double(p.ptx_dbw);
                          }
                          return s;
                        }}},
      {"subcarriers", {"prs", [](C& c, S v) { c.subcarriers = static_cast<int>(to_integer("subcarriers", v)); },
                       [](const C& c) { return std::to_string(c.subcarriers); }}},
      {"scs_hz", {"prs", [](C& c, S v) { c.scs_hz = to_number("scs_hz", v); },
                  [](const C& c) { return format_double(c.scs_hz); }}},
      {"fft_size", {"prs", [](C& c, S v) { c.fft_size = static_cast<int>(to_integer("fft_size", v)); },
                    [](const C& c) { return std::to_string(c.fft_size); }}},
      {"cp_length", {"prs", [](C& c, S v) { c.cp_length = static_cast<int>(to_integer("cp_length", v)); },
                     [](const C& c) { return std::to_string(c.cp_length); }}},
      {"sequence", {"prs",
                    [](C& c, S v) {
                      if (v == "gold") c.sequence = SequenceKind::kGold;
                      else if (v == "seeded") c.sequence = SequenceKind::kSeededQpsk;
                      else fail(ErrorCode::kConfig, "config: sequence must be 'gold' or 'seeded'");
                    },
                    [](const C& c) { return std::string(c.sequence == SequenceKind::kGold ? "gold" : "seeded"); }}},
      {"transmission", {"prs",
                        [](C& c, S v) {
                          if (v == "periodic") c.transmission = Extension::kPeriodic;
                          else if (v == "burst") c.transmission = Extension::kBurst;
                          else fail(ErrorCode::kConfig, "config: transmission must be 'periodic' or 'burst'");
                        },
                        [](const C& c) {
                          return std::string(c.transmission == Extension::kPeriodic ? "periodic" : "burst");
                        }}},
      {"doppler_max_hz", {"receiver", [](C& c, S v) { c.doppler_max_hz = to_number("doppler_max_hz", v); },
                          [](const C& c) { return format_double(c.doppler_max_hz); }}},
      {"doppler_step_hz", {"receiver", [](C& c, S v) { c.doppler_step_hz = to_number("doppler_step_hz", v); },
                           [](const C& c) { return format_double(c.doppler_step_hz); }}},
      {"noise_dbw", {"receiver",
                     [](C& c, S v) { c.noise_dbw = (v == "off") ? -1e300 : to_number("noise_dbw", v); },
                     [](const C& c) { return c.noise_enabled() ? format_double(c.noise_dbw) : std::string("off"); }}},
      {"effective_n", {"fit", [](C& c, S v) { c.effective_n = to_count("effective_n", v); },
                       [](const C& c) { return std::to_string(c.effective_n); }}},
      {"min_group", {"fit", [](C& c, S v) { c.min_group = to_count("min_group", v); },
                     [](const C& c) { return std::to_string(c.min_group); }}},
      {"shift_db", {"fit", [](C& c, S v) { c.shift_db = to_number("shift_db", v); },
                    [](const C& c) { return format_double(c.shift_db); }}},
  };
  return table;
}

inline const KeySpec* find_key(const std::string& key) {
  for (const auto& [name, spec] : key_table())
    if (name == key) return &spec;
  return nullptr;
}

}  // namespace detail

/// Applies one `key=value` or `section.key=value` assignment.
inline void apply_override(CampaignConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) fail(ErrorCode::kConfig, "override '" + std::string(assignment) + "': expected key=value");
  std::string key = detail::trim(assignment.substr(0, eq));
  const std::string value = detail::trim(assignment.substr(eq + 1));
  std::string section;
  if (const auto dot = key.find('.'); dot != std::string::npos) {
    section = key.substr(0, dot);
    key = key.substr(dot + 1);
  }
  const auto* spec = detail::find_key(key);
  if (spec == nullptr || (!section.empty() && spec->section != section)) {
    fail(ErrorCode::kConfig, "config: unknown key '" + (section.empty() ? key : section + "." + key) + "'");
  }
  spec->set(config, value);
}

inline CampaignConfig parse_config(std::istream& in) {
  CampaignConfig config;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail(ErrorCode::kConfig, "config line " + std::to_string(line_no) + ": bad section header");
      section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
      static const char* kSections[] = {"campaign", "shell", "scenario", "prs", "receiver", "fit"};
      if (std::find(std::begin(kSections), std::end(kSections), section) == std::end(kSections)) {
        fail(ErrorCode::kConfig, "config line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      }
      continue;
    }
    if (section.empty()) fail(ErrorCode::kConfig, "config line " + std::to_string(line_no) + ": key outside a section");
    if (t.find('=') == std::string::npos) {
      fail(ErrorCode::kConfig, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_override(config, section + "." + t);
    } catch (const Error& e) {
      fail(ErrorCode::kConfig, "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

inline CampaignConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config file '" + path + "'");
  return parse_config(in);
}

/// Canonical text form; parse_config(to_ini(c)) reproduces c.
inline std::string to_ini(const CampaignConfig& config) {
  std::ostringstream os;
  std::string section;
  for (const auto& [name, spec] : detail::key_table()) {
    if (spec.section != section) {
      if (!section.empty()) os << '\n';
      section = spec.section;
      os << '[' << section << "]\n";
    }
    os << name << " = " << spec.get(config) << '\n';
  }
  return os.str();
}

/// FNV-1a over the canonical text, leaving out the thread count (it cannot change results).
inline std::uint64_t config_hash(const CampaignConfig& config) {
  CampaignConfig c = config;
  c.threads = 0;
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : to_ini(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace ntnprs
