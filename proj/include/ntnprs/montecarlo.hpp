#pragma once

// Monte Carlo campaign: for each (user, iteration, sweep point) draw an epoch, take the four
// highest satellites, synthesise their comb-multiplexed PRS bursts, and record the
// interference each one sees at its own matched-filter peak.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ntnprs/channel.hpp"
#include "ntnprs/config.hpp"
#include "ntnprs/error.hpp"
#include "ntnprs/format.hpp"
#include "ntnprs/geometry.hpp"
#include "ntnprs/passes.hpp"
#include "ntnprs/prs_waveform.hpp"
#include "ntnprs/receiver.hpp"

namespace ntnprs {

inline constexpr int kPrsIdCount = 1008;

inline constexpr const char* kSampleHeader =
    "user_id,iter,m,cs,ptx_dbw,sat_of_interest,I_dbw,dtau1_s,dnu1_hz,c1_dbw,dtau2_s,dnu2_hz,c2_dbw,"
    "dtau3_s,dnu3_hz,c3_dbw,flags";

inline constexpr const char* kDrawHeader = "user_id,iter,sweep,m,cs,ptx_dbw,epoch_s,attempts,status";

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of one draw; independent of scheduling.
inline std::uint64_t draw_seed(std::uint64_t master, std::uint64_t user, std::uint64_t iteration, std::uint64_t sweep) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ user);
  h = splitmix64(h ^ iteration);
  return splitmix64(h ^ sweep);
}

struct DrawRecord {
  int user_id = 0;
  int iteration = 0;
  int sweep_index = 0;
  SweepPoint point;
  double epoch = 0.0;        // s, last epoch tried
  std::size_t attempts = 0;  // epochs drawn
  bool skipped = false;      // fewer visible satellites than required after the retry budget
};

struct SampleSet {
  std::vector<InterferenceSample> samples;  // ordered by (user, iteration, sweep, sat)
  std::vector<DrawRecord> draws;            // ordered by (user, iteration, sweep)
  std::vector<SweepPoint> sweep;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::string timestamp;
  std::size_t samples_per_draw = 0;

  [[nodiscard]] std::size_t skipped_draws() const {
    return static_cast<std::size_t>(std::count_if(draws.begin(), draws.end(), [](const auto& d) { return d.skipped; }));
  }
  [[nodiscard]] std::size_t flagged(std::uint32_t flag) const {
    return static_cast<std::size_t>(
        std::count_if(samples.begin(), samples.end(), [flag](const auto& s) { return (s.flags & flag) != 0; }));
  }
};

/// Where a campaign finds satellite states: the analytic shell or a loaded pass table.
class PassSourceView {
 public:
  explicit PassSourceView(const CampaignConfig& config, const PassTable* table = nullptr)
      : config_(config), table_(table) {}

  /// Draws an epoch and returns the visible set for it.
  template <class Rng>
  VisibleSet draw(const UserLocation& user, Rng& rng, double& epoch) const {
    if (table_ == nullptr) {
      std::uniform_real_distribution<double> t(0.0, config_.span_s);
      epoch = t(rng);
      return visible_set(user, config_.shell, epoch, config_.mask, config_.satellites);
    }
    const auto& epochs = table_->epochs(user.id);
    std::uniform_int_distribution<std::size_t> pick(0, epochs.size() - 1);
    const auto& e = epochs[pick(rng)];
    epoch = e.t;
    std::vector<VisibleSatellite> candidates;
    const Vec3 ue = user.ecef();
    for (const auto& row : table_->at(e)) candidates.push_back({row.state.sat_id, look_geometry(ue, row.state), row.state});
    return select_visible(std::move(candidates), config_.mask, config_.satellites);
  }

 private:
  const CampaignConfig& config_;
  const PassTable* table_;
};

/// Synthesises one snapshot and returns one sample per visible satellite.
template <class Rng>
std::vector<InterferenceSample> snapshot_samples(const CampaignConfig& config, const SweepPoint& point,
                                                 const VisibleSet& visible, Rng& rng) {
  const auto& sats = visible.satellites;
  std::vector<Link> links;
  std::vector<PrsConfig> prs;
  for (std::size_t j = 0; j < sats.size(); ++j) {
    PrsConfig c = config.prs(point);
    c.comb_offset = static_cast<int>(j);
    c.n_id = sats[j].sat_id % kPrsIdCount;
    prs.push_back(c);
    links.push_back({sats[j].sat_id, channel_params(sats[j].look, config.carrier_hz, rng),
                     ofdm_modulate(map_resource_grid(c), c)});
  }
  const auto rx = receive(std::span<const Link>(links), {config.transmission, config.noise_variance()}, rng);
  std::vector<InterferenceSample> out;
  for (std::size_t i = 0; i < links.size(); ++i) {
    auto s = interference_sample(rx, make_replica(links[i].transmit, prs[i]), i, {config.doppler_max_hz});
    if (std::abs(links[i].params.doppler) > config.doppler_max_hz) s.flags |= kFlagDopplerOutsideWindow;
    s.symbols = point.symbols;
    s.comb_size = point.comb_size;
    s.ptx_dbw = point.ptx_dbw;
    out.push_back(std::move(s));
  }
  return out;
}

struct CampaignOptions {
  std::optional<std::size_t> threads;  // overrides config.threads
};

inline SampleSet run_campaign(const CampaignConfig& config, const PassTable* passes = nullptr,
                              const CampaignOptions& opt = {}) {
  config.validate();
  if (config.pass_source == PassSource::kCsv && passes == nullptr) {
    fail(ErrorCode::kConfig, "campaign: pass_source = csv but no pass table was supplied");
  }
  const PassTable* table = config.pass_source == PassSource::kCsv ? passes : nullptr;
  if (table != nullptr && table->empty()) fail(ErrorCode::kGeometryConfig, "campaign: pass table is empty");

  const auto users = fibonacci_lattice(config.users);
  const auto sweep = config.sweep();
  const std::size_t n_tasks = config.users * config.iterations * sweep.size();
  const PassSourceView source(config, table);

  struct TaskResult {
    DrawRecord draw;
    std::vector<InterferenceSample> samples;
  };
  std::vector<TaskResult> results(n_tasks);

  auto run_task = [&](std::size_t task) {
    const std::size_t s = task % sweep.size();
    const std::size_t it = (task / sweep.size()) % config.iterations;
    const std::size_t u = task / (sweep.size() * config.iterations);
    std::mt19937_64 rng(draw_seed(config.seed, u, it, s));
    TaskResult& r = results[task];
    r.draw = {users[u].id, static_cast<int>(it), static_cast<int>(s), sweep[s], 0.0, 0, true};
    VisibleSet visible;
    for (std::size_t attempt = 0; attempt <= config.retry_budget; ++attempt) {
      visible = source.draw(users[u], rng, r.draw.epoch);
      ++r.draw.attempts;
      if (visible.sufficient) {
        r.draw.skipped = false;
        break;
      }
    }
    if (r.draw.skipped) return;
    r.samples = snapshot_samples(config, sweep[s], visible, rng);
    for (auto& smp : r.samples) {
      smp.user_id = users[u].id;
      smp.iteration = static_cast<int>(it);
      smp.sweep_index = static_cast<int>(s);
      smp.epoch = r.draw.epoch;
    }
  };

  std::size_t threads = opt.threads.value_or(config.threads);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n_tasks);
  if (threads <= 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t t = next.fetch_add(1);
          if (t >= n_tasks) return;
          try {
            run_task(t);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n_tasks;
            return;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  SampleSet set;
  set.seed = config.seed;
  set.config_hash = config_hash(config);
  set.sweep = sweep;
  set.samples_per_draw = config.satellites;
  for (auto& r : results) {
    set.draws.push_back(r.draw);
    for (auto& s : r.samples) set.samples.push_back(std::move(s));
  }
  const std::size_t skipped = set.skipped_draws();
  if (2 * skipped > n_tasks) {
    fail(ErrorCode::kGeometryConfig, "campaign: " + std::to_string(skipped) + " of " + std::to_string(n_tasks) +
                                         " draws found fewer than " + std::to_string(config.satellites) +
                                         " satellites above the mask");
  }
  return set;
}

// ---- sample CSV ----

namespace detail {
inline std::string power_dbw(double w) { return format_double(w > 0.0 ? to_db(w) : kInterferenceFloorDbw); }
}  // namespace detail

inline void write_samples_csv(std::ostream& os, std::span<const InterferenceSample> samples) {
  os << kSampleHeader << '\n';
  for (const auto& s : samples) {
    os << s.user_id << ',' << s.iteration << ',' << s.symbols << ',' << s.comb_size << ',' << format_double(s.ptx_dbw)
       << ',' << s.sat_of_interest << ',' << format_double(s.interference_dbw);
    for (std::size_t c = 0; c < 3; ++c) {
      if (c < s.contributions.size()) {
        const auto& k = s.contributions[c];
        os << ',' << format_double(k.delta_delay) << ',' << format_double(k.delta_doppler) << ','
           << detail::power_dbw(k.power);
      } else {
        os << ",,,";
      }
    }
    os << ',' << s.flags << '\n';
  }
}

inline std::vector<InterferenceSample> read_samples_csv(std::istream& in) {
  std::string line;
  std::vector<InterferenceSample> out;
  if (!std::getline(in, line)) return out;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSampleHeader) fail(ErrorCode::kLoad, "sample CSV row 1: header mismatch");
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    const auto where = "sample CSV row " + std::to_string(row) + ": ";
    if (f.size() != 17) fail(ErrorCode::kLoad, where + "expected 17 fields, got " + std::to_string(f.size()));
    auto num = [&](std::size_t i) {
      double v = 0.0;
      if (!parse_double(f[i], v) || !std::isfinite(v)) fail(ErrorCode::kLoad, where + "bad field " + std::to_string(i + 1));
      return v;
    };
    InterferenceSample s;
    s.user_id = static_cast<int>(num(0));
    s.iteration = static_cast<int>(num(1));
    s.symbols = static_cast<int>(num(2));
    s.comb_size = static_cast<int>(num(3));
    s.ptx_dbw = num(4);
    s.sat_of_interest = static_cast<int>(num(5));
    s.interference_dbw = num(6);
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t b = 7 + 3 * c;
      if (f[b].empty() && f[b + 1].empty() && f[b + 2].empty()) continue;
      Contribution k;
      k.delta_delay = num(b);
      k.delta_doppler = num(b + 1);
      const double dbw = num(b + 2);
      k.power = dbw <= kInterferenceFloorDbw ? 0.0 : from_db(dbw);
      s.contributions.push_back(k);
    }
    s.flags = static_cast<std::uint32_t>(num(16));
    s.interference = (s.flags & kFlagFloor) ? 0.0 : from_db(s.interference_dbw);
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_draws_csv(std::ostream& os, std::span<const DrawRecord> draws) {
  os << kDrawHeader << '\n';
  for (const auto& d : draws) {
    os << d.user_id << ',' << d.iteration << ',' << d.sweep_index << ',' << d.point.symbols << ','
       << d.point.comb_size << ',' << format_double(d.point.ptx_dbw) << ',' << format_double(d.epoch) << ','
       << d.attempts << ',' << (d.skipped ? "skipped" : "ok") << '\n';
  }
}

}  // namespace ntnprs
