#pragma once

// Generalized extreme value distribution, F(x) = exp(-[1 + k (x - mu) / sigma]^(-1/k)),
// with maximum-likelihood fitting started from probability-weighted moments.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ntnprs/error.hpp"
#include "ntnprs/optimize.hpp"

namespace ntnprs {

struct GevParams {
  double k = 0.0;      // shape
  double sigma = 1.0;  // scale
  double mu = 0.0;     // location
};

inline constexpr double kGumbelThreshold = 1e-9;

inline void check_scale(const GevParams& p) {
  if (!(p.sigma > 0.0)) fail(ErrorCode::kInvalidArgument, "gev: scale must be positive");
}

inline bool gev_in_support(double x, const GevParams& p) {
  return std::abs(p.k) < kGumbelThreshold || 1.0 + p.k * (x - p.mu) / p.sigma > 0.0;
}

inline double gev_cdf(double x, const GevParams& p) {
  check_scale(p);
  const double z = (x - p.mu) / p.sigma;
  if (std::abs(p.k) < kGumbelThreshold) return std::exp(-std::exp(-z));
  const double t = 1.0 + p.k * z;
  if (t <= 0.0) return p.k > 0.0 ? 0.0 : 1.0;
  return std::exp(-std::pow(t, -1.0 / p.k));
}

inline double gev_logpdf(double x, const GevParams& p) {
  const double z = (x - p.mu) / p.sigma;
  if (std::abs(p.k) < kGumbelThreshold) return -std::log(p.sigma) - z - std::exp(-z);
  const double t = 1.0 + p.k * z;
  if (t <= 0.0) return -std::numeric_limits<double>::infinity();
  const double lt = std::log(t);
  return -std::log(p.sigma) - (1.0 + 1.0 / p.k) * lt - std::exp(-lt / p.k);
}

inline double gev_pdf(double x, const GevParams& p) {
  check_scale(p);
  return std::exp(gev_logpdf(x, p));
}

inline double gev_quantile(double u, const GevParams& p) {
  check_scale(p);
  if (!(u > 0.0 && u < 1.0)) fail(ErrorCode::kInvalidArgument, "gev_quantile: probability outside (0, 1)");
  const double y = -std::log(u);
  if (std::abs(p.k) < kGumbelThreshold) return p.mu - p.sigma * std::log(y);
  return p.mu + p.sigma * (std::pow(y, -p.k) - 1.0) / p.k;
}

/// Inverse-CDF draws.
template <class Rng>
std::vector<double> sample_gev(const GevParams& p, std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  for (auto& v : out) {
    // uniform on the open interval (0, 1)
    const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    v = gev_quantile(u, p);
  }
  return out;
}

inline double gev_log_likelihood(std::span<const double> samples, const GevParams& p) {
  if (!(p.sigma > 0.0)) return -std::numeric_limits<double>::infinity();
  double ll = 0.0;
  for (double x : samples) {
    const double v = gev_logpdf(x, p);
    if (!std::isfinite(v)) return -std::numeric_limits<double>::infinity();
    ll += v;
  }
  return ll;
}

/// Hosking's probability-weighted-moment estimator.
inline GevParams gev_pwm_estimate(std::span<const double> samples) {
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double j = static_cast<double>(i);
    b0 += x[i];
    b1 += x[i] * j / (n - 1.0);
    b2 += x[i] * j * (j - 1.0) / ((n - 1.0) * (n - 2.0));
  }
  b0 /= n;
  b1 /= n;
  b2 /= n;
  const double c = (2.0 * b1 - b0) / (3.0 * b2 - b0) - std::log(2.0) / std::log(3.0);
  const double kappa = 7.8590 * c + 2.9554 * c * c;
  GevParams p;
  if (std::abs(kappa) < 1e-6) {
    p.k = 0.0;
    p.sigma = (2.0 * b1 - b0) / std::log(2.0);
    p.mu = b0 - std::numbers::egamma * p.sigma;
  } else {
    const double g = std::tgamma(1.0 + kappa);
    p.k = -kappa;
    p.sigma = (2.0 * b1 - b0) * kappa / (g * (1.0 - std::pow(2.0, -kappa)));
    p.mu = b0 + p.sigma * (g - 1.0) / kappa;
  }
  return p;
}

struct GevFit {
  GevParams params;
  GevParams initial;
  double log_likelihood = 0.0;
  std::size_t iterations = 0;
};

class GevFitError : public Error {
 public:
  GevFitError(const std::string& what, GevParams best) : Error(ErrorCode::kFit, what), best_(best) {}
  [[nodiscard]] const GevParams& best() const { return best_; }

 private:
  GevParams best_;
};

struct GevFitOptions {
  double tolerance = 1e-6;
  std::size_t max_iterations = 5000;
};

/// Maximum-likelihood GEV fit.
inline GevFit fit_gev(std::span<const double> samples, const GevFitOptions& opt = {}) {
  if (samples.size() < 50) fail(ErrorCode::kInvalidArgument, "fit_gev: at least 50 samples required");
  for (double v : samples) {
    if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "fit_gev: non-finite sample");
  }
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) fail(ErrorCode::kFit, "fit_gev: degenerate samples");

  GevFit fit;
  fit.initial = gev_pwm_estimate(samples);
  GevParams start = fit.initial;
  if (!std::isfinite(start.sigma) || start.sigma <= 0.0 || !std::isfinite(start.mu) || !std::isfinite(start.k)) {
    start = {0.0, 0.0, 0.0};
  }
  if (!std::isfinite(gev_log_likelihood(samples, start))) {
    // Gumbel has unbounded support on both sides, so it is always feasible.
    double mean = 0.0, var = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(samples.size());
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(samples.size());
    start.k = 0.0;
    start.sigma = std::sqrt(6.0 * var) / std::numbers::pi;
    start.mu = mean - std::numbers::egamma * start.sigma;
  }

  const double mu0 = start.mu, s0 = start.sigma, k0 = start.k;
  auto decode = [&](const std::vector<double>& v) { return GevParams{k0 + v[2], s0 * std::exp(v[1]), mu0 + s0 * v[0]}; };
  const double n = static_cast<double>(samples.size());
  auto objective = [&](const std::vector<double>& v) {
    const double ll = gev_log_likelihood(samples, decode(v));
    return std::isfinite(ll) ? -ll / n : 1e300;  // support violations are penalised
  };
  const auto res = nelder_mead(objective, {0.0, 0.0, 0.0}, {0.1, opt.tolerance, opt.max_iterations});
  const GevParams best = decode(res.x);
  if (!res.converged) {
    throw GevFitError("fit_gev: simplex did not converge in " + std::to_string(res.iterations) + " iterations", best);
  }
  fit.params = best;
  fit.log_likelihood = gev_log_likelihood(samples, best);
  fit.iterations = res.iterations;
  return fit;
}

}  // namespace ntnprs
