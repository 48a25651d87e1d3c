#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace ntnprs {

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct SimplexOptions {
  double initial_step = 0.1;
  double tolerance = 1e-6;  // simplex diameter
  std::size_t max_iterations = 5000;
};

/// Nelder-Mead minimisation with standard coefficients. Converged when the largest
/// vertex distance from the best vertex drops below the tolerance.
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                 const SimplexOptions& opt = {}) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += opt.initial_step;
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  std::vector<std::size_t> order(n + 1);
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += (pts[order[i]][j] - pts[order[0]][j]) * (pts[order[i]][j] - pts[order[0]][j]);
      d = std::max(d, std::sqrt(s));
    }
    return d;
  };
  auto blend = [n](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) r[j] = a[j] + t * (b[j] - a[j]);
    return r;
  };

  SimplexResult res;
  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    if (diameter() < opt.tolerance) {
      res.converged = true;
      break;
    }
    const std::size_t worst = order[n];
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[order[i]][j] / static_cast<double>(n);

    const auto reflected = blend(centroid, pts[worst], -1.0);
    const double fr = f(reflected);
    if (fr < vals[order[0]]) {
      const auto expanded = blend(centroid, pts[worst], -2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[order[n - 1]]) {
      pts[worst] = reflected;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const auto contracted = blend(centroid, outside ? reflected : pts[worst], 0.5);
    const double fc = f(contracted);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = contracted;
      vals[worst] = fc;
      continue;
    }
    // shrink towards the best vertex
    const std::size_t best = order[0];
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      pts[i] = blend(pts[best], pts[i], 0.5);
      vals[i] = f(pts[i]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  res.x = pts[best];
  res.value = vals[best];
  return res;
}

}  // namespace ntnprs
