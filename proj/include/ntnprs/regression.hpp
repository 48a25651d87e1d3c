#pragma once

// Least-squares models of the GEV parameters against the PRS configuration:
//   mu(m, P)  = a1 / sqrt(m) + a2 P + a3     (P in dBW)
//   sigma(m)  = b1 m + b2
//   k(m)      = c1 / sqrt(m) + c2
// fitted independently for each comb size.

#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ntnprs/error.hpp"
#include "ntnprs/gev.hpp"

namespace ntnprs {

struct FitPoint {
  int symbols = 1;
  double ptx_dbw = 0.0;
  int comb_size = 4;
  GevParams params;
};

struct CoefficientSet {
  double a1 = 0.0, a2 = 0.0, a3 = 0.0;
  double b1 = 0.0, b2 = 0.0;
  double c1 = 0.0, c2 = 0.0;
  double rms_mu = 0.0, rms_sigma = 0.0, rms_k = 0.0;
  std::size_t points = 0;
};

struct GevModel {
  std::map<int, CoefficientSet> by_comb_size;
};

struct LeastSquaresResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd residual;
  double rms = 0.0;
};

/// Solves min ||X beta - y|| by column-pivoted QR. A column that adds no rank is reported by name.
inline LeastSquaresResult least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        const std::vector<std::string>& columns) {
  if (x.rows() != y.size() || x.rows() < x.cols()) {
    fail(ErrorCode::kRegression, "least_squares: fewer observations than unknowns");
  }
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.leftCols(j + 1));
    if (qr.rank() < j + 1) {
      fail(ErrorCode::kRegression, "least_squares: rank-deficient design matrix, column '" +
                                       columns.at(static_cast<std::size_t>(j)) + "' is dependent on earlier columns");
    }
  }
  LeastSquaresResult r;
  r.beta = x.colPivHouseholderQr().solve(y);
  r.residual = y - x * r.beta;
  r.rms = std::sqrt(r.residual.squaredNorm() / static_cast<double>(y.size()));
  return r;
}

inline GevModel fit_parameter_models(std::span<const FitPoint> fits) {
  std::map<int, std::vector<FitPoint>> groups;
  for (const auto& f : fits) groups[f.comb_size].push_back(f);
  if (groups.empty()) fail(ErrorCode::kRegression, "fit_parameter_models: no fits");

  GevModel model;
  for (const auto& [cs, pts] : groups) {
    std::set<int> ms;
    std::set<double> ps;
    for (const auto& p : pts) {
      ms.insert(p.symbols);
      ps.insert(p.ptx_dbw);
    }
    const std::string tag = "cs=" + std::to_string(cs);
    if (ms.size() < 3) fail(ErrorCode::kRegression, tag + ": need >= 3 distinct symbol counts (m)");
    if (ps.size() < 2) fail(ErrorCode::kRegression, tag + ": need >= 2 distinct transmit powers (ptx_dbw)");

    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd xmu(n, 3), xsigma(n, 2), xk(n, 2);
    Eigen::VectorXd mu(n), sigma(n), k(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& p = pts[static_cast<std::size_t>(i)];
      const double u = 1.0 / std::sqrt(static_cast<double>(p.symbols));
      xmu.row(i) << u, p.ptx_dbw, 1.0;
      xsigma.row(i) << static_cast<double>(p.symbols), 1.0;
      xk.row(i) << u, 1.0;
      mu(i) = p.params.mu;
      sigma(i) = p.params.sigma;
      k(i) = p.params.k;
    }
    const auto rmu = least_squares(xmu, mu, {"1/sqrt(m)", "ptx_dbw", "1"});
    const auto rsigma = least_squares(xsigma, sigma, {"m", "1"});
    const auto rk = least_squares(xk, k, {"1/sqrt(m)", "1"});

    CoefficientSet c;
    c.a1 = rmu.beta(0);
    c.a2 = rmu.beta(1);
    c.a3 = rmu.beta(2);
    c.b1 = rsigma.beta(0);
    c.b2 = rsigma.beta(1);
    c.c1 = rk.beta(0);
    c.c2 = rk.beta(1);
    c.rms_mu = rmu.rms;
    c.rms_sigma = rsigma.rms;
    c.rms_k = rk.rms;
    c.points = pts.size();
    model.by_comb_size[cs] = c;
  }
  return model;
}

inline GevParams model_eval(const CoefficientSet& c, int symbols, double ptx_dbw) {
  if (symbols < 1) fail(ErrorCode::kEvaluation, "model_eval: symbol count must be >= 1");
  const double u = 1.0 / std::sqrt(static_cast<double>(symbols));
  GevParams p;
  p.k = c.c1 * u + c.c2;
  p.sigma = c.b1 * symbols + c.b2;
  p.mu = c.a1 * u + c.a2 * ptx_dbw + c.a3;
  if (!(p.sigma > 0.0)) {
    fail(ErrorCode::kEvaluation, "model_eval: non-positive scale at m=" + std::to_string(symbols));
  }
  return p;
}

inline GevParams model_eval(const GevModel& model, int symbols, double ptx_dbw, int comb_size) {
  const auto it = model.by_comb_size.find(comb_size);
  if (it == model.by_comb_size.end()) {
    fail(ErrorCode::kEvaluation, "model_eval: no coefficients for cs=" + std::to_string(comb_size));
  }
  return model_eval(it->second, symbols, ptx_dbw);
}

/// Coefficients published for the 4-satellite PRS interference model.
inline GevModel reference_model() {
  GevModel m;
  m.by_comb_size[4] = {0.629, 1.99, -182.0, -0.090, 8.35, -0.185, 0.038};
  m.by_comb_size[6] = {0.643, 1.99, -183.0, -0.098, 8.80, -0.229, 0.044};
  m.by_comb_size[12] = {0.612, 2.00, -184.0, -0.157, 10.0, -0.172, -0.011};
  return m;
}

}  // namespace ntnprs
