#pragma once

// Batch commands behind the `ntnprs` executable. Each takes a resolved configuration and
// an output directory and writes plain files; argument parsing lives in the tool itself.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ntnprs/analysis.hpp"
#include "ntnprs/config.hpp"
#include "ntnprs/error.hpp"
#include "ntnprs/montecarlo.hpp"
#include "ntnprs/passes.hpp"
#include "ntnprs/receiver.hpp"
#include "ntnprs/regression.hpp"
#include "ntnprs/serialize.hpp"

namespace ntnprs::cli {

namespace fs = std::filesystem;

struct Context {
  CampaignConfig config;
  std::vector<std::string> overrides;
  fs::path out = ".";
  std::ostream* log = nullptr;

  std::ostream& say() const {
    static std::ostringstream sink;
    return log ? *log : sink;
  }
};

/// Config file (optional), then overrides, then an explicit seed.
inline CampaignConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides,
                                     const std::optional<std::uint64_t>& seed) {
  CampaignConfig c = path.empty() ? CampaignConfig{} : load_config(path);
  for (const auto& o : overrides) apply_override(c, o);
  if (seed) c.seed = *seed;
  c.validate();
  return c;
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorCode::kIo, "cannot create output directory '" + dir.string() + "'");
}

inline std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(path, mode);
  if (!os) fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  os.exceptions(std::ios::badbit);
  return os;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline fs::path pass_path(const Context& ctx, const std::string& explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  return ctx.config.pass_file;
}

// ---- generate-passes ----

inline void generate_passes_cmd(const Context& ctx, const std::string& path_arg = {}) {
  const auto& c = ctx.config;
  const auto users = fibonacci_lattice(c.users);
  const auto table = generate_passes(users, c.shell, c.span_s, c.pass_step_s, c.mask);
  const fs::path path = path_arg.empty() ? ctx.out / fs::path(c.pass_file).filename() : fs::path(path_arg);
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  auto os = open_out(path);
  write_passes_csv(os, table);
  std::set<int> sats;
  for (const auto& r : table.rows()) sats.insert(r.state.sat_id);
  ctx.say() << "wrote " << path.string() << ": " << table.size() << " rows, " << table.user_count() << " of "
            << c.users << " users, " << sats.size() << " distinct satellites\n";
}

// ---- simulate ----

inline SampleSet simulate_cmd(const Context& ctx, const std::string& passes_arg = {}) {
  const auto& c = ctx.config;
  PassTable table;
  if (c.pass_source == PassSource::kCsv) {
    const fs::path p = pass_path(ctx, passes_arg);
    if (!fs::exists(p)) fail(ErrorCode::kIo, "pass file not found: '" + p.string() + "'");
    table = load_passes(p.string());
  }
  ensure_dir(ctx.out);
  SampleSet set = run_campaign(c, c.pass_source == PassSource::kCsv ? &table : nullptr);
  set.timestamp = utc_timestamp();
  {
    auto os = open_out(ctx.out / "samples.csv");
    write_samples_csv(os, set.samples);
  }
  {
    auto os = open_out(ctx.out / "draws.csv");
    write_draws_csv(os, set.draws);
  }
  {
    auto os = open_out(ctx.out / "metadata.json");
    os << metadata_json(set, c, ctx.overrides).dump(2) << '\n';
  }
  ctx.say() << "wrote " << set.samples.size() << " samples (" << set.skipped_draws() << " skipped draws, "
            << set.flagged(kFlagFloor) << " at the floor) to " << (ctx.out / "samples.csv").string() << '\n';
  return set;
}

// ---- fit ----

inline std::vector<InterferenceSample> load_samples(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open sample file '" + path.string() + "'");
  return read_samples_csv(in);
}

inline FitSummary fit_cmd(const Context& ctx, const std::string& samples_arg = {}) {
  const fs::path path = samples_arg.empty() ? ctx.out / "samples.csv" : fs::path(samples_arg);
  const auto samples = load_samples(path);
  FitSettings settings;
  settings.min_group = ctx.config.min_group;
  settings.candidates.shift = ctx.config.shift_db;
  settings.candidates.ks.effective_n = ctx.config.effective_n;
  const auto summary = fit_groups(samples, settings);
  ensure_dir(ctx.out);
  {
    auto os = open_out(ctx.out / "fit_report.json");
    os << to_json(summary).dump(2) << '\n';
  }
  for (const auto& g : summary.groups) {
    const auto label = g.key.label();
    {
      auto os = open_out(ctx.out / ("ecdf_" + label + ".csv"));
      write_ecdf_csv(os, g.values);
    }
    {
      auto os = open_out(ctx.out / ("hist_" + label + ".csv"));
      write_histogram_csv(os, g.values);
    }
    const auto [lo, hi] = std::minmax_element(g.values.begin(), g.values.end());
    const double pad = 0.1 * (*hi - *lo);
    {
      auto os = open_out(ctx.out / ("gevpdf_" + label + ".csv"));
      write_pdf_csv(os, g.report.get(Candidate::kGev).pdf, *lo - pad, *hi + pad);
    }
    ctx.say() << label << ": n=" << g.values.size() << " winner=" << g.report.best().name()
              << " D=" << g.report.best().ks.statistic << '\n';
  }
  for (const auto& w : summary.warnings) ctx.say() << "warning: " << w << '\n';
  return summary;
}

// ---- model ----

inline GevModel model_cmd(const Context& ctx, const std::string& fit_arg = {}) {
  const fs::path path = fit_arg.empty() ? ctx.out / "fit_report.json" : fs::path(fit_arg);
  const auto points = fit_points_from_json(read_json_file(path.string()));
  // Comb sizes without enough (m, P_TX) span are reported and left out; if none has
  // enough, the regression error names the missing dimension.
  std::map<int, std::vector<FitPoint>> by_cs;
  for (const auto& p : points) by_cs[p.comb_size].push_back(p);
  std::vector<FitPoint> usable;
  std::optional<Error> first_error;
  for (const auto& [cs, pts] : by_cs) {
    try {
      fit_parameter_models(pts);
      usable.insert(usable.end(), pts.begin(), pts.end());
    } catch (const Error& e) {
      if (!first_error) first_error = e;
      ctx.say() << "warning: " << e.what() << "; comb size left out of the model\n";
    }
  }
  if (usable.empty()) {
    if (first_error) throw *first_error;
    fail(ErrorCode::kRegression, "model: fit report has no groups");
  }
  const auto model = fit_parameter_models(usable);
  ensure_dir(ctx.out);
  {
    auto os = open_out(ctx.out / "gev_model.json");
    os << to_json(model).dump(2) << '\n';
  }
  for (const auto& [cs, coeffs] : model.by_comb_size) {
    for (const auto& [tag, p] : {std::pair{"mu", 'm'}, std::pair{"sigma", 's'}, std::pair{"k", 'k'}}) {
      auto os = open_out(ctx.out / (std::string("model_") + tag + "_cs" + std::to_string(cs) + ".csv"));
      write_model_curve_csv(os, points, coeffs, cs, p);
    }
    ctx.say() << "cs=" << cs << ": a=(" << coeffs.a1 << ", " << coeffs.a2 << ", " << coeffs.a3 << ") b=("
              << coeffs.b1 << ", " << coeffs.b2 << ") c=(" << coeffs.c1 << ", " << coeffs.c2 << ")\n";
  }
  return model;
}

// ---- ddm ----

struct DdmRequest {
  int user_id = 0;
  double t = 0.0;
  std::size_t reference = 0;     // index into the visible set (highest elevation first)
  std::size_t csv_halfwidth = 0; // lags either side of the reference peak written as CSV; 0 = none
};

inline DelayDopplerMap ddm_cmd(const Context& ctx, const DdmRequest& req) {
  const auto& c = ctx.config;
  const auto users = fibonacci_lattice(c.users);
  if (req.user_id < 0 || static_cast<std::size_t>(req.user_id) >= users.size()) {
    fail(ErrorCode::kConfig, "ddm: user " + std::to_string(req.user_id) + " outside [0, users)");
  }
  const auto visible = visible_set(users[static_cast<std::size_t>(req.user_id)], c.shell, req.t, c.mask, c.satellites);
  if (visible.satellites.empty()) {
    fail(ErrorCode::kGeometryConfig, "ddm: no satellites above the mask for user " + std::to_string(req.user_id) +
                                         " at t=" + format_double(req.t) + " s");
  }
  if (req.reference >= visible.satellites.size()) fail(ErrorCode::kConfig, "ddm: reference index out of range");
  const SweepPoint point = c.sweep().front();
  std::mt19937_64 rng(draw_seed(c.seed, static_cast<std::uint64_t>(req.user_id), 0, 0));
  std::vector<Link> links;
  std::vector<PrsConfig> prs;
  for (std::size_t j = 0; j < visible.satellites.size(); ++j) {
    PrsConfig p = c.prs(point);
    p.comb_offset = static_cast<int>(j);
    p.n_id = visible.satellites[j].sat_id % kPrsIdCount;
    prs.push_back(p);
    links.push_back({visible.satellites[j].sat_id, channel_params(visible.satellites[j].look, c.carrier_hz, rng),
                     ofdm_modulate(map_resource_grid(p), p)});
  }
  const auto rx = receive(std::span<const Link>(links), {c.transmission, c.noise_variance()}, rng);
  const auto replica = make_replica(links[req.reference].transmit, prs[req.reference]);
  const auto grid = DopplerGrid::symmetric(c.doppler_max_hz, c.doppler_step_hz);
  auto map = caf(rx.composite, replica, grid);

  ensure_dir(ctx.out);
  {
    auto os = open_out(ctx.out / "ddm.bin", std::ios::out | std::ios::binary);
    write_ddm_binary(os, map);
  }
  const auto& truth = rx.composite.truth[req.reference];
  if (req.csv_halfwidth > 0) {
    auto os = open_out(ctx.out / "ddm_window.csv");
    const std::size_t lo = truth.delay_samples > req.csv_halfwidth ? truth.delay_samples - req.csv_halfwidth : 0;
    write_ddm_csv(os, map, lo, truth.delay_samples + req.csv_halfwidth + 1);
  }
  const auto peak = map.peak();
  json links_json = json::array();
  for (std::size_t j = 0; j < rx.composite.truth.size(); ++j) {
    const auto& t = rx.composite.truth[j];
    links_json.push_back({{"sat_id", t.sat_id},
                          {"comb_offset", prs[j].comb_offset},
                          {"elevation_deg", rad2deg(visible.satellites[j].look.elevation)},
                          {"delay_s", t.params.delay},
                          {"lag", t.delay_samples},
                          {"doppler_hz", t.params.doppler},
                          {"doppler_in_window", grid.contains(t.params.doppler)},
                          {"path_gain_db", to_db(t.params.path_gain)}});
  }
  json summary = {{"user_id", req.user_id},
                  {"t_s", req.t},
                  {"m", point.symbols},
                  {"cs", point.comb_size},
                  {"ptx_dbw", point.ptx_dbw},
                  {"reference_sat", truth.sat_id},
                  {"delays", map.delays()},
                  {"dopplers", map.dopplers()},
                  {"epoch_s", rx.composite.epoch},
                  {"peak", {{"lag", peak.lag}, {"doppler_hz", map.doppler_axis[peak.doppler_index]},
                            {"value_w", peak.value}, {"value_dbw", to_db(peak.value)}}},
                  {"links", links_json}};
  {
    auto os = open_out(ctx.out / "ddm_summary.json");
    os << summary.dump(2) << '\n';
  }
  ctx.say() << "DDM " << map.delays() << " x " << map.dopplers() << " written to " << (ctx.out / "ddm.bin").string()
            << "; peak at lag " << peak.lag << ", " << map.doppler_axis[peak.doppler_index] << " Hz\n";
  return map;
}

// ---- report ----

inline std::string report_cmd(const Context& ctx) {
  std::ostringstream md;
  md << "# PRS interference campaign report\n\n";
  const auto meta_path = ctx.out / "metadata.json";
  if (fs::exists(meta_path)) {
    const auto m = read_json_file(meta_path.string());
    md << "## Campaign\n\n"
       << "- seed: " << m.at("seed").dump() << "\n- config hash: " << m.at("config_hash").get<std::string>()
       << "\n- users x iterations: " << m.at("users").dump() << " x " << m.at("iterations").dump()
       << "\n- samples: " << m.at("samples").dump() << " (skipped draws: " << m.at("skipped_draws").dump()
       << ", floor-flagged: " << m.at("flagged_floor").dump() << ")\n- transmission: "
       << m.at("transmission").get<std::string>() << "\n\n";
  }
  const auto fit_path = ctx.out / "fit_report.json";
  if (fs::exists(fit_path)) {
    const auto f = read_json_file(fit_path.string());
    md << "## Distribution fits (KS distance D)\n\n| m | cs | P_TX (dBW) | n | median (dBW) | winner |";
    for (Candidate cand : kAllCandidates) md << ' ' << candidate_name(cand) << " |";
    md << "\n|---|---|---|---|---|---|";
    for (std::size_t i = 0; i < std::size(kAllCandidates); ++i) md << "---|";
    md << '\n';
    for (const auto& g : f.at("groups")) {
      md << "| " << g.at("m").dump() << " | " << g.at("cs").dump() << " | " << g.at("ptx_dbw").dump() << " | "
         << g.at("n").dump() << " | " << std::fixed << std::setprecision(2) << g.at("median_dbw").get<double>()
         << " | " << g.at("winner").get<std::string>() << " |";
      for (const auto& cand : g.at("candidates")) md << ' ' << std::setprecision(4) << cand.at("ks_d").get<double>() << " |";
      md << '\n';
    }
    for (const auto& w : f.at("warnings")) md << "\n- warning: " << w.get<std::string>();
    md << '\n';
  }
  const auto model_path = ctx.out / "gev_model.json";
  if (fs::exists(model_path)) {
    const auto model = gev_model_from_json(read_json_file(model_path.string()));
    md << "## GEV parameter model\n\n| cs | a1 | a2 | a3 | b1 | b2 | c1 | c2 | rms mu | rms sigma | rms k |\n"
       << "|---|---|---|---|---|---|---|---|---|---|---|\n";
    md << std::setprecision(4);
    for (const auto& [cs, c] : model.by_comb_size) {
      md << "| " << cs << " | " << c.a1 << " | " << c.a2 << " | " << c.a3 << " | " << c.b1 << " | " << c.b2
         << " | " << c.c1 << " | " << c.c2 << " | " << c.rms_mu << " | " << c.rms_sigma << " | " << c.rms_k << " |\n";
    }
  }
  ensure_dir(ctx.out);
  auto os = open_out(ctx.out / "report.md");
  os << md.str();
  ctx.say() << "wrote " << (ctx.out / "report.md").string() << '\n';
  return md.str();
}

}  // namespace ntnprs::cli
