#pragma once

// Candidate distribution fits ranked by the Kolmogorov-Smirnov statistic.
//
// Normal and GEV are fitted on the samples as given (dBW). The positive-support
// families are fitted on x - min(x) + shift so they can consume negative dBW values.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "ntnprs/error.hpp"
#include "ntnprs/gev.hpp"
#include "ntnprs/optimize.hpp"
#include "ntnprs/stats.hpp"

namespace ntnprs {

enum class Candidate { kNormal, kLogNormal, kGamma, kRayleigh, kRician, kGev };

inline constexpr Candidate kAllCandidates[] = {Candidate::kNormal,   Candidate::kLogNormal, Candidate::kGamma,
                                               Candidate::kRayleigh, Candidate::kRician,    Candidate::kGev};

inline const char* candidate_name(Candidate c) {
  switch (c) {
    case Candidate::kNormal: return "Normal";
    case Candidate::kLogNormal: return "LogNormal";
    case Candidate::kGamma: return "Gamma";
    case Candidate::kRayleigh: return "Rayleigh";
    case Candidate::kRician: return "Rician";
    case Candidate::kGev: return "GEV";
  }
  return "?";
}

inline bool needs_positive_support(Candidate c) {
  return c == Candidate::kLogNormal || c == Candidate::kGamma || c == Candidate::kRayleigh || c == Candidate::kRician;
}

struct CandidateFit {
  Candidate kind = Candidate::kNormal;
  std::vector<std::pair<std::string, double>> params;
  double offset = 0.0;  // subtracted from x before evaluating (positive-support families)
  KsResult ks;
  std::function<double(double)> cdf;  // on the original sample scale
  std::function<double(double)> pdf;

  [[nodiscard]] std::string name() const { return candidate_name(kind); }
};

struct FitReport {
  std::vector<CandidateFit> candidates;  // in kAllCandidates order
  std::size_t winner = 0;                // argmin D, first on ties
  std::size_t sample_count = 0;
  double shift = 0.1;                    // dB added after subtracting the minimum
  std::size_t effective_n = 1000;

  [[nodiscard]] const CandidateFit& best() const { return candidates[winner]; }
  [[nodiscard]] const CandidateFit& get(Candidate c) const {
    for (const auto& f : candidates)
      if (f.kind == c) return f;
    fail(ErrorCode::kInvalidArgument, "fit report: candidate missing");
  }
};

struct CandidateOptions {
  double shift = 0.1;
  KsOptions ks;
};

namespace detail {

inline double log_bessel_i0(double z) {
  if (z < 600.0) return std::log(boost::math::cyl_bessel_i(0, z));
  // large-argument expansion
  return z - 0.5 * std::log(2.0 * std::numbers::pi * z) + std::log1p(1.0 / (8.0 * z) + 9.0 / (128.0 * z * z));
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

inline Moments moments(std::span<const double> x) {
  Moments m;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  for (double v : x) m.var += (v - m.mean) * (v - m.mean);
  m.var /= static_cast<double>(x.size());
  return m;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline CandidateFit fit_normal(std::span<const double> x) {
  const auto m = moments(x);
  const double sd = std::sqrt(m.var);
  CandidateFit f;
  f.kind = Candidate::kNormal;
  f.params = {{"mean", m.mean}, {"sd", sd}};
  f.cdf = [=](double v) { return normal_cdf((v - m.mean) / sd); };
  f.pdf = [=](double v) {
    const double z = (v - m.mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
  };
  return f;
}

inline CandidateFit fit_lognormal(std::span<const double> y, double offset) {
  std::vector<double> logs(y.size());
  std::transform(y.begin(), y.end(), logs.begin(), [](double v) { return std::log(v); });
  const auto m = moments(logs);
  const double s = std::sqrt(m.var);
  CandidateFit f;
  f.kind = Candidate::kLogNormal;
  f.offset = offset;
  f.params = {{"mu_log", m.mean}, {"sigma_log", s}};
  f.cdf = [=](double v) {
    const double t = v - offset;
    return t <= 0.0 ? 0.0 : normal_cdf((std::log(t) - m.mean) / s);
  };
  f.pdf = [=](double v) {
    const double t = v - offset;
    if (t <= 0.0) return 0.0;
    const double z = (std::log(t) - m.mean) / s;
    return std::exp(-0.5 * z * z) / (t * s * std::sqrt(2.0 * std::numbers::pi));
  };
  return f;
}

inline CandidateFit fit_gamma(std::span<const double> y, double offset) {
  double mean = 0.0, mean_log = 0.0;
  for (double v : y) {
    mean += v;
    mean_log += std::log(v);
  }
  mean /= static_cast<double>(y.size());
  mean_log /= static_cast<double>(y.size());
  const double s = std::log(mean) - mean_log;
  double shape = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  for (int it = 0; it < 100; ++it) {
    const double g = std::log(shape) - boost::math::digamma(shape) - s;
    const double dg = 1.0 / shape - boost::math::trigamma(shape);
    const double next = shape - g / dg;
    const double step = next > 0.0 ? next : shape / 2.0;
    if (std::abs(step - shape) < 1e-12 * shape) {
      shape = step;
      break;
    }
    shape = step;
  }
  const double scale = mean / shape;
  CandidateFit f;
  f.kind = Candidate::kGamma;
  f.offset = offset;
  f.params = {{"shape", shape}, {"scale", scale}};
  f.cdf = [=](double v) {
    const double t = v - offset;
    return t <= 0.0 ? 0.0 : boost::math::gamma_p(shape, t / scale);
  };
  f.pdf = [=](double v) {
    const double t = v - offset;
    return t <= 0.0 ? 0.0 : boost::math::gamma_p_derivative(shape, t / scale) / scale;
  };
  return f;
}

inline CandidateFit fit_rayleigh(std::span<const double> y, double offset) {
  double s2 = 0.0;
  for (double v : y) s2 += v * v;
  const double sigma = std::sqrt(s2 / (2.0 * static_cast<double>(y.size())));
  CandidateFit f;
  f.kind = Candidate::kRayleigh;
  f.offset = offset;
  f.params = {{"sigma", sigma}};
  f.cdf = [=](double v) {
    const double t = v - offset;
    return t <= 0.0 ? 0.0 : -std::expm1(-t * t / (2.0 * sigma * sigma));
  };
  f.pdf = [=](double v) {
    const double t = v - offset;
    return t <= 0.0 ? 0.0 : t / (sigma * sigma) * std::exp(-t * t / (2.0 * sigma * sigma));
  };
  return f;
}

inline double rician_logpdf(double t, double nu, double sigma) {
  const double s2 = sigma * sigma;
  return std::log(t) - std::log(s2) - (t * t + nu * nu) / (2.0 * s2) + log_bessel_i0(t * nu / s2);
}

inline CandidateFit fit_rician(std::span<const double> y, double offset) {
  // moment start: E[x^2] = nu^2 + 2 sigma^2, with the spread of x as a proxy for sigma
  const auto m = moments(y);
  double second = 0.0;
  for (double v : y) second += v * v;
  second /= static_cast<double>(y.size());
  const double sigma0 = std::max(std::sqrt(m.var), 1e-6);
  const double nu0 = std::sqrt(std::max(second - 2.0 * sigma0 * sigma0, 1e-6));
  auto objective = [&](const std::vector<double>& v) {
    const double nu = std::exp(v[0]), sigma = std::exp(v[1]);
    double ll = 0.0;
    for (double t : y) ll += rician_logpdf(t, nu, sigma);
    return std::isfinite(ll) ? -ll / static_cast<double>(y.size()) : 1e300;
  };
  const auto res = nelder_mead(objective, {std::log(nu0), std::log(sigma0)}, {0.2, 1e-9, 5000});
  const double nu = std::exp(res.x[0]), sigma = std::exp(res.x[1]);
  CandidateFit f;
  f.kind = Candidate::kRician;
  f.offset = offset;
  f.params = {{"nu", nu}, {"sigma", sigma}};
  const double lambda = nu * nu / (sigma * sigma);
  f.cdf = [=](double v) {
    const double t = v - offset;
    if (t <= 0.0) return 0.0;
    const boost::math::non_central_chi_squared dist(2.0, lambda);
    return boost::math::cdf(dist, t * t / (sigma * sigma));
  };
  f.pdf = [=](double v) {
    const double t = v - offset;
    return t <= 0.0 ? 0.0 : std::exp(rician_logpdf(t, nu, sigma));
  };
  return f;
}

inline CandidateFit fit_gev_candidate(std::span<const double> x) {
  const auto fit = fit_gev(x);
  const GevParams p = fit.params;
  CandidateFit f;
  f.kind = Candidate::kGev;
  f.params = {{"k", p.k}, {"sigma", p.sigma}, {"mu", p.mu}};
  f.cdf = [=](double v) { return gev_cdf(v, p); };
  f.pdf = [=](double v) { return gev_pdf(v, p); };
  return f;
}

}  // namespace detail

/// Fits every candidate family and ranks them by KS distance.
inline FitReport fit_candidates(std::span<const double> samples, const CandidateOptions& opt = {}) {
  if (samples.size() < 50) fail(ErrorCode::kInvalidArgument, "fit_candidates: at least 50 samples required");
  for (double v : samples) {
    if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "fit_candidates: non-finite sample");
  }
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) fail(ErrorCode::kFit, "fit_candidates: zero-variance samples");

  const double offset = *lo - opt.shift;
  std::vector<double> shifted(samples.size());
  std::transform(samples.begin(), samples.end(), shifted.begin(), [offset](double v) { return v - offset; });

  FitReport report;
  report.sample_count = samples.size();
  report.shift = opt.shift;
  report.effective_n = opt.ks.effective_n;
  for (Candidate c : kAllCandidates) {
    CandidateFit f;
    switch (c) {
      case Candidate::kNormal: f = detail::fit_normal(samples); break;
      case Candidate::kLogNormal: f = detail::fit_lognormal(shifted, offset); break;
      case Candidate::kGamma: f = detail::fit_gamma(shifted, offset); break;
      case Candidate::kRayleigh: f = detail::fit_rayleigh(shifted, offset); break;
      case Candidate::kRician: f = detail::fit_rician(shifted, offset); break;
      case Candidate::kGev: f = detail::fit_gev_candidate(samples); break;
    }
    f.ks = ks_test(samples, f.cdf, opt.ks);
    report.candidates.push_back(std::move(f));
  }
  for (std::size_t i = 1; i < report.candidates.size(); ++i) {
    if (report.candidates[i].ks.statistic < report.candidates[report.winner].ks.statistic) report.winner = i;
  }
  return report;
}

}  // namespace ntnprs
