#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "ntnprs/regression.hpp"

using namespace ntnprs;

namespace {

template <class F>
std::pair<ErrorCode, std::string> error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return {e.code(), e.what()};
  }
  return {static_cast<ErrorCode>(-1), ""};
}

std::vector<FitPoint> planted(const CoefficientSet& c, int cs, const std::vector<int>& ms,
                              const std::vector<double>& ps) {
  std::vector<FitPoint> out;
  for (int m : ms) {
    for (double p : ps) out.push_back({m, p, cs, model_eval(c, m, p)});
  }
  return out;
}

const std::vector<int> kMs{1, 2, 4, 8, 12};
const std::vector<double> kPs{1.0, 10.0, 30.0};

}  // namespace

TEST(LeastSquares, NoiselessRecovery) {
  const CoefficientSet truth{0.629, 1.99, -182.0, -0.090, 8.35, -0.185, 0.038};
  const auto pts = planted(truth, 4, kMs, kPs);
  const auto model = fit_parameter_models(pts);
  const auto& c = model.by_comb_size.at(4);
  EXPECT_NEAR(c.a1, truth.a1, 1e-9);
  EXPECT_NEAR(c.a2, truth.a2, 1e-9);
  EXPECT_NEAR(c.a3, truth.a3, 1e-9);
  EXPECT_NEAR(c.b1, truth.b1, 1e-9);
  EXPECT_NEAR(c.b2, truth.b2, 1e-9);
  EXPECT_NEAR(c.c1, truth.c1, 1e-9);
  EXPECT_NEAR(c.c2, truth.c2, 1e-9);
  EXPECT_LT(c.rms_mu, 1e-9);
  EXPECT_EQ(c.points, pts.size());
}

TEST(LeastSquares, SeparateCombSizesFitSeparately) {
  const auto ref = reference_model();
  std::vector<FitPoint> pts;
  for (int cs : {4, 6, 12}) {
    const auto p = planted(ref.by_comb_size.at(cs), cs, kMs, kPs);
    pts.insert(pts.end(), p.begin(), p.end());
  }
  const auto model = fit_parameter_models(pts);
  ASSERT_EQ(model.by_comb_size.size(), 3u);
  for (int cs : {4, 6, 12}) {
    EXPECT_NEAR(model.by_comb_size.at(cs).a3, ref.by_comb_size.at(cs).a3, 1e-9);
    EXPECT_NEAR(model.by_comb_size.at(cs).c2, ref.by_comb_size.at(cs).c2, 1e-9);
  }
}

// Normal-equation solution computed independently with a dense pseudo-inverse.
TEST(LeastSquares, MatchesPseudoInverse) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(12, 3);
  Eigen::VectorXd y(12);
  for (int i = 0; i < 12; ++i) {
    x.row(i) << g(rng), g(rng) * 10.0, 1.0;
    y(i) = g(rng) * 5.0 - 120.0;
  }
  const auto r = least_squares(x, y, {"u", "p", "1"});
  const Eigen::VectorXd oracle = (x.transpose() * x).inverse() * x.transpose() * y;
  EXPECT_LT((r.beta - oracle).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((x.transpose() * r.residual).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(r.rms, std::sqrt(r.residual.squaredNorm() / 12.0), 1e-15);
}

TEST(LeastSquares, RankDeficiencyNamesColumn) {
  Eigen::MatrixXd x(5, 3);
  x << 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8, 1, 5, 10, 1;
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
  const auto [code, what] = error_of([&] { least_squares(x, y, {"u", "p", "1"}); });
  EXPECT_EQ(code, ErrorCode::kRegression);
  EXPECT_NE(what.find("'p'"), std::string::npos) << what;
}

TEST(LeastSquares, TooFewRows) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(2, 3);
  const Eigen::VectorXd y = Eigen::VectorXd::Ones(2);
  EXPECT_EQ(error_of([&] { least_squares(x, y, {"a", "b", "c"}); }).first, ErrorCode::kRegression);
}

TEST(ParameterModels, InsufficientSpanMessages) {
  const auto c = reference_model().by_comb_size.at(4);
  {
    const auto [code, what] = error_of([&] { fit_parameter_models(planted(c, 4, {1, 12}, kPs)); });
    EXPECT_EQ(code, ErrorCode::kRegression);
    EXPECT_NE(what.find("cs=4"), std::string::npos);
    EXPECT_NE(what.find("symbol counts"), std::string::npos);
  }
  {
    const auto [code, what] = error_of([&] { fit_parameter_models(planted(c, 6, kMs, {30.0})); });
    EXPECT_EQ(code, ErrorCode::kRegression);
    EXPECT_NE(what.find("cs=6"), std::string::npos);
    EXPECT_NE(what.find("transmit powers"), std::string::npos);
  }
  EXPECT_EQ(error_of([] { fit_parameter_models({}); }).first, ErrorCode::kRegression);
}

TEST(ModelEval, PublishedCoefficients) {
  const auto ref = reference_model();
  const auto a = model_eval(ref, 1, 30.0, 4);
  EXPECT_NEAR(a.mu, -121.67, 0.005);
  EXPECT_NEAR(a.sigma, 8.26, 1e-9);
  EXPECT_NEAR(a.k, -0.147, 1e-9);
  EXPECT_NEAR(model_eval(ref, 12, 1.0, 12).mu, -181.82, 0.005);
  EXPECT_NEAR(model_eval(ref, 12, 1.0, 12).mu, 0.612 / std::sqrt(12.0) + 2.0 - 184.0, 1e-12);
}

TEST(ModelEval, ShapeTendsToConstantForLongBursts) {
  auto c = reference_model().by_comb_size.at(6);
  c.b1 = 0.0;  // keep the scale positive out to large m
  EXPECT_NEAR(model_eval(c, 1000000, 30.0).k - c.c2, c.c1 / 1000.0, 1e-15);
}

TEST(ModelEval, Errors) {
  const auto ref = reference_model();
  EXPECT_EQ(error_of([&] { model_eval(ref, 12, 30.0, 8); }).first, ErrorCode::kEvaluation);
  EXPECT_EQ(error_of([&] { model_eval(ref, 0, 30.0, 4); }).first, ErrorCode::kEvaluation);
  // cs=12: sigma = -0.157 m + 10 crosses zero near m = 64
  EXPECT_EQ(error_of([&] { model_eval(ref, 64, 30.0, 12); }).first, ErrorCode::kEvaluation);
  EXPECT_NO_THROW(model_eval(ref, 63, 30.0, 12));
}
