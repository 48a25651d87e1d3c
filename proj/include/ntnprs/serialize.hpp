#pragma once

// JSON forms of fit reports, GEV models and campaign metadata.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ntnprs/analysis.hpp"
#include "ntnprs/candidates.hpp"
#include "ntnprs/config.hpp"
#include "ntnprs/error.hpp"
#include "ntnprs/montecarlo.hpp"
#include "ntnprs/regression.hpp"

namespace ntnprs {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

inline json to_json(const CandidateFit& f) {
  json params = json::object();
  for (const auto& [k, v] : f.params) params[k] = v;
  json j = {{"name", f.name()}, {"params", params}, {"ks_d", f.ks.statistic}, {"p_value", f.ks.p_value}};
  if (needs_positive_support(f.kind)) j["offset_dbw"] = f.offset;
  return j;
}

inline json to_json(const FitSummary& s) {
  json groups = json::array();
  for (const auto& g : s.groups) {
    json cands = json::array();
    for (const auto& c : g.report.candidates) cands.push_back(to_json(c));
    groups.push_back({{"m", g.key.symbols},
                      {"cs", g.key.comb_size},
                      {"ptx_dbw", g.key.ptx_dbw},
                      {"n", g.values.size()},
                      {"excluded_flagged", g.excluded},
                      {"median_dbw", median(g.values)},
                      {"winner", g.report.best().name()},
                      {"candidates", cands}});
  }
  return {{"version", kVersion},
          {"positive_support_transform", "x - min(x) + shift_db"},
          {"shift_db", s.shift_db},
          {"ks_effective_n", s.effective_n},
          {"groups", groups},
          {"warnings", s.warnings}};
}

/// GEV parameters of every group in a fit report, for the regression step.
inline std::vector<FitPoint> fit_points_from_json(const json& j) {
  std::vector<FitPoint> pts;
  try {
    for (const auto& g : j.at("groups")) {
      FitPoint p;
      p.symbols = g.at("m").get<int>();
      p.comb_size = g.at("cs").get<int>();
      p.ptx_dbw = g.at("ptx_dbw").get<double>();
      bool found = false;
      for (const auto& c : g.at("candidates")) {
        if (c.at("name") != "GEV") continue;
        const auto& q = c.at("params");
        p.params = {q.at("k").get<double>(), q.at("sigma").get<double>(), q.at("mu").get<double>()};
        found = true;
      }
      if (!found) fail(ErrorCode::kLoad, "fit report group without a GEV candidate");
      pts.push_back(p);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kLoad, std::string("fit report: ") + e.what());
  }
  return pts;
}

inline json to_json(const GevModel& m) {
  json sets = json::array();
  for (const auto& [cs, c] : m.by_comb_size) {
    sets.push_back({{"cs", cs},
                    {"a1", c.a1}, {"a2", c.a2}, {"a3", c.a3},
                    {"b1", c.b1}, {"b2", c.b2},
                    {"c1", c.c1}, {"c2", c.c2},
                    {"rms_mu", c.rms_mu}, {"rms_sigma", c.rms_sigma}, {"rms_k", c.rms_k},
                    {"points", c.points}});
  }
  return {{"version", kVersion},
          {"model", "mu = a1/sqrt(m) + a2*ptx_dbw + a3; sigma = b1*m + b2; k = c1/sqrt(m) + c2"},
          {"comb_sizes", sets}};
}

inline GevModel gev_model_from_json(const json& j) {
  GevModel m;
  try {
    for (const auto& s : j.at("comb_sizes")) {
      CoefficientSet c;
      c.a1 = s.at("a1"); c.a2 = s.at("a2"); c.a3 = s.at("a3");
      c.b1 = s.at("b1"); c.b2 = s.at("b2");
      c.c1 = s.at("c1"); c.c2 = s.at("c2");
      c.rms_mu = s.value("rms_mu", 0.0);
      c.rms_sigma = s.value("rms_sigma", 0.0);
      c.rms_k = s.value("rms_k", 0.0);
      c.points = s.value("points", std::size_t{0});
      m.by_comb_size[s.at("cs").get<int>()] = c;
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kLoad, std::string("GEV model: ") + e.what());
  }
  return m;
}

inline json metadata_json(const SampleSet& set, const CampaignConfig& config, const std::vector<std::string>& overrides) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(set.config_hash));
  json sweep = json::array();
  for (const auto& p : set.sweep) sweep.push_back({{"m", p.symbols}, {"cs", p.comb_size}, {"ptx_dbw", p.ptx_dbw}});
  return {{"version", kVersion},
          {"seed", set.seed},
          {"config_hash", hash},
          {"timestamp", set.timestamp},
          {"users", config.users},
          {"iterations", config.iterations},
          {"sweep", sweep},
          {"draws", set.draws.size()},
          {"skipped_draws", set.skipped_draws()},
          {"skipped_samples", set.skipped_draws() * set.samples_per_draw},
          {"samples", set.samples.size()},
          {"samples_per_draw", set.samples_per_draw},
          {"sample_policy", "every selected satellite is the signal of interest once per draw"},
          {"flagged_floor", set.flagged(kFlagFloor)},
          {"flagged_doppler_window", set.flagged(kFlagDopplerOutsideWindow)},
          {"transmission", config.transmission == Extension::kPeriodic ? "periodic" : "burst"},
          {"pass_source", config.pass_source == PassSource::kCsv ? "csv" : "internal"},
          {"overrides", overrides},
          {"config", to_ini(config)}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kLoad, "'" + path + "': " + e.what());
  }
}

}  // namespace ntnprs
