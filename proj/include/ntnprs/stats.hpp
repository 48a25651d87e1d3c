#pragma once

// Empirical CDF and the one-sample Kolmogorov-Smirnov test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ntnprs/error.hpp"

namespace ntnprs {

class Ecdf {
 public:
  explicit Ecdf(std::span<const double> samples) : sorted_(samples.begin(), samples.end()) {
    if (sorted_.size() < 2) fail(ErrorCode::kInvalidArgument, "ecdf: at least 2 samples required");
    for (double v : sorted_) {
      if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "ecdf: non-finite sample");
    }
    std::sort(sorted_.begin(), sorted_.end());
  }

  /// Fraction of samples <= x.
  [[nodiscard]] double operator()(double x) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

  [[nodiscard]] std::size_t size() const { return sorted_.size(); }
  [[nodiscard]] const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

/// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{j-1} exp(-2 j^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;  // D
  double p_value = 0.0;
};

struct KsOptions {
  // Sample count used in the p-value. D is always computed on every sample.
  std::size_t effective_n = 1000;
};

/// Supremum distance between the ECDF and `cdf`, checked on both sides of every jump.
template <class Cdf>
double ks_statistic(const Ecdf& ecdf, const Cdf& cdf) {
  const auto& xs = ecdf.sorted();
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < xs.size()) {
    std::size_t j = i;
    while (j + 1 < xs.size() && xs[j + 1] == xs[i]) ++j;  // ties share one jump
    const double g = cdf(xs[i]);
    d = std::max({d, static_cast<double>(j + 1) / n - g, g - static_cast<double>(i) / n});
    i = j + 1;
  }
  return std::clamp(d, 0.0, 1.0);
}

template <class Cdf>
KsResult ks_test(std::span<const double> samples, const Cdf& cdf, const KsOptions& opt = {}) {
  if (samples.size() < 10) fail(ErrorCode::kInvalidArgument, "ks_test: at least 10 samples required");
  const Ecdf ecdf(samples);
  KsResult r;
  r.statistic = ks_statistic(ecdf, cdf);
  const double n_eff = static_cast<double>(
      opt.effective_n == 0 ? samples.size() : std::min(opt.effective_n, samples.size()));
  const double root = std::sqrt(n_eff);
  r.p_value = kolmogorov_q((root + 0.12 + 0.11 / root) * r.statistic);
  return r;
}

}  // namespace ntnprs
