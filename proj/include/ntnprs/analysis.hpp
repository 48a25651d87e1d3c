#pragma once

// Campaign samples -> per-configuration distribution fits -> parameter regression inputs,
// plus the plot-ready curves behind the ECDF/PDF comparison figures.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ntnprs/candidates.hpp"
#include "ntnprs/config.hpp"
#include "ntnprs/format.hpp"
#include "ntnprs/receiver.hpp"
#include "ntnprs/regression.hpp"
#include "ntnprs/stats.hpp"

namespace ntnprs {

struct GroupKey {
  int symbols = 0;
  int comb_size = 0;
  double ptx_dbw = 0.0;

  friend auto operator<=>(const GroupKey&, const GroupKey&) = default;

  [[nodiscard]] std::string label() const {
    return "m" + std::to_string(symbols) + "_cs" + std::to_string(comb_size) + "_p" + format_double(ptx_dbw);
  }
};

struct GroupFit {
  GroupKey key;
  std::vector<double> values;  // unflagged interference, dBW
  std::size_t excluded = 0;    // floor-flagged samples left out
  FitReport report;
};

struct FitSummary {
  std::vector<GroupFit> groups;
  std::vector<std::string> warnings;  // under-filled or failed groups
  double shift_db = 0.1;
  std::size_t effective_n = 1000;
};

struct FitSettings {
  std::size_t min_group = 50;
  CandidateOptions candidates;
  bool include_floor = false;
};

inline std::map<GroupKey, std::vector<const InterferenceSample*>> group_samples(
    std::span<const InterferenceSample> samples) {
  std::map<GroupKey, std::vector<const InterferenceSample*>> g;
  for (const auto& s : samples) g[{s.symbols, s.comb_size, s.ptx_dbw}].push_back(&s);
  return g;
}

inline FitSummary fit_groups(std::span<const InterferenceSample> samples, const FitSettings& settings = {}) {
  FitSummary out;
  out.shift_db = settings.candidates.shift;
  out.effective_n = settings.candidates.ks.effective_n;
  for (const auto& [key, members] : group_samples(samples)) {
    GroupFit g;
    g.key = key;
    for (const auto* s : members) {
      if ((s->flags & kFlagFloor) && !settings.include_floor) {
        ++g.excluded;
      } else {
        g.values.push_back(s->interference_dbw);
      }
    }
    if (g.values.size() < settings.min_group) {
      out.warnings.push_back("group " + key.label() + ": " + std::to_string(g.values.size()) +
                             " unflagged samples, need " + std::to_string(settings.min_group) + "; skipped");
      continue;
    }
    try {
      g.report = fit_candidates(g.values, settings.candidates);
    } catch (const Error& e) {
      out.warnings.push_back("group " + key.label() + ": " + e.what() + "; skipped");
      continue;
    }
    out.groups.push_back(std::move(g));
  }
  return out;
}

inline std::vector<FitPoint> fit_points(const FitSummary& summary) {
  std::vector<FitPoint> pts;
  for (const auto& g : summary.groups) {
    const auto& gev = g.report.get(Candidate::kGev);
    GevParams p;
    for (const auto& [name, v] : gev.params) {
      if (name == "k") p.k = v;
      if (name == "sigma") p.sigma = v;
      if (name == "mu") p.mu = v;
    }
    pts.push_back({g.key.symbols, g.key.ptx_dbw, g.key.comb_size, p});
  }
  return pts;
}

inline double median(std::vector<double> v) {
  if (v.empty()) fail(ErrorCode::kInvalidArgument, "median: empty input");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---- curves (two-column CSV) ----

inline void write_ecdf_csv(std::ostream& os, std::span<const double> values) {
  const Ecdf e(values);
  const auto& x = e.sorted();
  const double n = static_cast<double>(x.size());
  os << "x_dbw,ecdf\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i + 1 < x.size() && x[i + 1] == x[i]) continue;  // one row per distinct value
    os << format_double(x[i]) << ',' << format_double(static_cast<double>(i + 1) / n) << '\n';
  }
}

/// Density histogram at bin centres.
inline void write_histogram_csv(std::ostream& os, std::span<const double> values, std::size_t bins = 60) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double width = (*hi - *lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    auto b = width > 0.0 ? static_cast<std::size_t>((v - *lo) / width) : 0;
    counts[std::min(b, bins - 1)]++;
  }
  os << "x_dbw,density\n";
  const double norm = static_cast<double>(values.size()) * (width > 0.0 ? width : 1.0);
  for (std::size_t b = 0; b < bins; ++b) {
    os << format_double(*lo + (static_cast<double>(b) + 0.5) * width) << ','
       << format_double(static_cast<double>(counts[b]) / norm) << '\n';
  }
}

inline void write_pdf_csv(std::ostream& os, const std::function<double(double)>& pdf, double lo, double hi,
                          std::size_t points = 400) {
  os << "x_dbw,density\n";
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    os << format_double(x) << ',' << format_double(pdf(x)) << '\n';
  }
}

/// (m, ptx_dbw, fitted, modeled) for one GEV parameter of one comb size.
inline void write_model_curve_csv(std::ostream& os, std::span<const FitPoint> points, const CoefficientSet& c,
                                  int comb_size, char parameter) {
  os << "m,ptx_dbw,fitted,modeled\n";
  std::vector<FitPoint> sel;
  for (const auto& p : points)
    if (p.comb_size == comb_size) sel.push_back(p);
  std::sort(sel.begin(), sel.end(), [](const FitPoint& a, const FitPoint& b) {
    return std::tie(a.ptx_dbw, a.symbols) < std::tie(b.ptx_dbw, b.symbols);
  });
  for (const auto& p : sel) {
    const double u = 1.0 / std::sqrt(static_cast<double>(p.symbols));
    double fitted = 0.0, modeled = 0.0;
    switch (parameter) {
      case 'm': fitted = p.params.mu; modeled = c.a1 * u + c.a2 * p.ptx_dbw + c.a3; break;
      case 's': fitted = p.params.sigma; modeled = c.b1 * p.symbols + c.b2; break;
      default: fitted = p.params.k; modeled = c.c1 * u + c.c2; break;
    }
    os << p.symbols << ',' << format_double(p.ptx_dbw) << ',' << format_double(fitted) << ','
       << format_double(modeled) << '\n';
  }
}

}  // namespace ntnprs
