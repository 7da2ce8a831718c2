#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "lbf/moment_matrix.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using lbf::MomentMatrix;
using lbf::VariableList;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r == 0 ? 0 : static_cast<Eigen::Index>(rows.begin()->size());
  MatrixXd m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

MatrixXd scalar(double x) { return MatrixXd::Constant(1, 1, x); }

bool swept_set_is(const MomentMatrix& m, const VariableList& expected) {
  auto got = m.swept_variables();
  auto want = expected;
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  return got == want;
}

}  // namespace

TEST_CASE("normal beliefs on single factors") {
  const auto g = lbf::from_normal({"G"}, vec({-0.05}), scalar(0.0004));
  CHECK(g.size() == 1);
  CHECK_FALSE(g.is_swept("G"));
  CHECK(g.mean_at("G") == doctest::Approx(-0.05));
  CHECK(g.entry("G", "G") == doctest::Approx(0.0004));

  const auto m = lbf::from_normal({"M"}, vec({0.10}), scalar(0.0064));
  CHECK(m.mean_at("M") == doctest::Approx(0.10));
  CHECK(m.entry("M", "M") == doctest::Approx(0.0064));
}

TEST_CASE("zero-variance normal equals an observation") {
  const auto a = lbf::from_normal({"X"}, vec({0.0}), scalar(0.0));
  const auto b = lbf::from_observation({"X"}, vec({0.0}));
  CHECK(lbf::max_abs_difference(a, b) == 0.0);
}

TEST_CASE("normal construction rejects bad input") {
  CHECK_THROWS_AS(lbf::from_normal({"X", "Y"}, vec({0.0}), MatrixXd::Identity(2, 2)),
                  lbf::DimensionError);
  CHECK_THROWS_AS(lbf::from_normal({"X", "Y"}, vec({0.0, 0.0}), mat({{1, 0.5}, {0.2, 1}})),
                  lbf::DomainError);
  CHECK_THROWS_AS(lbf::from_normal({"X", "Y"}, vec({0.0, 0.0}), mat({{1, 2}, {2, 1}})),
                  lbf::DomainError);
  CHECK_THROWS_AS(lbf::from_normal({"X", "X"}, vec({0.0, 0.0}), MatrixXd::Identity(2, 2)),
                  lbf::VariableError);
}

TEST_CASE("observations") {
  const auto one = lbf::from_observation({"G"}, vec({0.02}));
  CHECK(one.mean_at("G") == doctest::Approx(0.02));
  CHECK(one.entry("G", "G") == 0.0);
  CHECK_FALSE(one.is_swept("G"));

  const auto two = lbf::from_observation({"G", "M"}, vec({0.02, 0.01}));
  CHECK(two.block().isZero());
  CHECK(two.mean_at("M") == doctest::Approx(0.01));

  CHECK_THROWS_AS(lbf::from_observation({"X"}, VectorXd(0)), lbf::DimensionError);
}

TEST_CASE("vacuous beliefs") {
  const auto f = lbf::vacuous({"F1"});
  CHECK(f.is_swept("F1"));
  CHECK(f.mean_at("F1") == 0.0);
  CHECK(f.entry("F1", "F1") == 0.0);

  CHECK(lbf::vacuous({}).empty());

  const auto ab = lbf::vacuous({"A", "B"});
  CHECK(ab.fully_swept());
  CHECK(ab.block().isZero());
  CHECK(ab.mean().isZero());

  const auto g = lbf::from_normal({"G"}, vec({0.1}), scalar(0.01));
  CHECK(lbf::max_abs_difference(lbf::combine(g, lbf::vacuous({})), g) == 0.0);
}

TEST_CASE("partially known beliefs") {
  const auto m = lbf::proper_lbf({"X"}, {"Y"}, vec({0.1}), scalar(0.01));
  CHECK(m.variables() == VariableList{"X", "Y"});
  CHECK(m.is_swept("X"));
  CHECK_FALSE(m.is_swept("Y"));
  CHECK(m.mean_at("X") == 0.0);
  CHECK(m.entry("X", "X") == 0.0);
  CHECK(m.entry("X", "Y") == 0.0);
  CHECK(m.mean_at("Y") == doctest::Approx(0.1));
  CHECK(m.entry("Y", "Y") == doctest::Approx(0.01));

  const auto known_only = lbf::proper_lbf({}, {"Y"}, vec({0.1}), scalar(0.01));
  CHECK(lbf::max_abs_difference(known_only, lbf::from_normal({"Y"}, vec({0.1}), scalar(0.01))) ==
        0.0);

  const auto ignorant_only = lbf::proper_lbf({"X"}, {}, VectorXd(0), MatrixXd(0, 0));
  CHECK(lbf::max_abs_difference(ignorant_only, lbf::vacuous({"X"})) == 0.0);
}

TEST_CASE("portfolio blend equation layout") {
  const auto m = lbf::from_linear_equation({"S1", "S2", "S3"}, {"P"}, mat({{0.2}, {0.7}, {0.1}}),
                                           vec({0.0}));
  const auto p = lbf::permute(m, {"P", "S1", "S2", "S3"});
  CHECK(swept_set_is(p, {"S1", "S2", "S3"}));
  CHECK(p.mean().isZero());
  CHECK(p.entry("S1", "P") == doctest::Approx(0.2));
  CHECK(p.entry("S2", "P") == doctest::Approx(0.7));
  CHECK(p.entry("S3", "P") == doctest::Approx(0.1));
  CHECK(p.entry("P", "S2") == doctest::Approx(0.7));
  CHECK(p.entry("P", "P") == 0.0);
  CHECK(p.entry("S1", "S2") == 0.0);
  CHECK(p.entry("S1", "S1") == 0.0);
}

TEST_CASE("linear equation special cases") {
  const auto identity = lbf::from_linear_equation({"X"}, {"Y"}, scalar(1.0), vec({0.0}));
  // Y = X: fixing X fixes Y.
  const auto fixed = lbf::to_summary(lbf::condition(identity, {"X"}, vec({0.3})));
  CHECK(fixed.mean_of("Y") == doctest::Approx(0.3));
  CHECK(fixed.variance_of("Y") == doctest::Approx(0.0));

  const auto constant = lbf::from_linear_equation({"X"}, {"Y"}, scalar(0.0), vec({0.25}));
  const auto y = lbf::to_summary(lbf::marginalize(constant, {"Y"}));
  CHECK(y.mean_of("Y") == doctest::Approx(0.25));
  CHECK(y.variance_of("Y") == doctest::Approx(0.0));
  CHECK(lbf::marginalize(constant, {"X"}).is_swept("X"));
  CHECK_THROWS(lbf::to_summary(lbf::marginalize(constant, {"X"})));
}

TEST_CASE("regression with folded residual") {
  const auto m = lbf::from_regression({"G", "M"}, {"S1"}, mat({{0.6}, {0.4}}), vec({0.03}),
                                      scalar(0.0064));
  CHECK(swept_set_is(m, {"G", "M"}));
  CHECK(m.mean_at("S1") == doctest::Approx(0.03));
  CHECK(m.entry("G", "S1") == doctest::Approx(0.6));
  CHECK(m.entry("S1", "M") == doctest::Approx(0.4));
  CHECK(m.entry("S1", "S1") == doctest::Approx(0.0064));
  CHECK(m.entry("G", "G") == 0.0);

  const auto exact = lbf::from_regression({"G", "M"}, {"S1"}, mat({{0.6}, {0.4}}), vec({0.03}),
                                          scalar(0.0));
  const auto eq = lbf::from_linear_equation({"G", "M"}, {"S1"}, mat({{0.6}, {0.4}}), vec({0.03}));
  CHECK(lbf::max_abs_difference(exact, eq) == 0.0);
}

TEST_CASE("stock model with explicit residual") {
  const auto eq = lbf::from_linear_equation({"G", "M", "F1"}, {"S1"}, mat({{0.6}, {0.4}, {1.0}}),
                                            vec({0.03}));
  const auto residual = lbf::sweep(lbf::from_normal({"F1"}, vec({0.0}), scalar(0.0064)), {"F1"});
  const auto m = lbf::combine(eq, residual);
  CHECK(swept_set_is(m, {"G", "M", "F1"}));
  CHECK(m.mean_at("S1") == doctest::Approx(0.03));
  CHECK(m.mean_at("G") == 0.0);
  CHECK(m.mean_at("F1") == 0.0);
  CHECK(m.entry("G", "S1") == doctest::Approx(0.6));
  CHECK(m.entry("M", "S1") == doctest::Approx(0.4));
  CHECK(m.entry("F1", "S1") == doctest::Approx(1.0));
  CHECK(m.entry("F1", "F1") == doctest::Approx(-1.0 / (0.08 * 0.08)));
  CHECK(m.entry("S1", "S1") == 0.0);
  CHECK(m.entry("G", "F1") == 0.0);

  // Removing the residual recovers the folded form.
  const auto folded = lbf::marginalize(m, {"G", "M", "S1"});
  const auto direct = lbf::from_regression({"G", "M"}, {"S1"}, mat({{0.6}, {0.4}}), vec({0.03}),
                                           scalar(0.0064));
  CHECK(lbf::max_abs_difference(direct, folded) < 1e-12);
}

TEST_CASE("equation plus residual prior gives the regression layout") {
  // X, E swept; Y = X A + E + b, then E ~ N(0, S) in potential form.
  const MatrixXd a = mat({{0.5, -1.0}});
  const VectorXd b = vec({0.2, 0.1});
  const MatrixXd s = mat({{0.04, 0.01}, {0.01, 0.09}});
  MatrixXd coef(3, 2);
  coef << a, MatrixXd::Identity(2, 2);
  const auto eq = lbf::from_linear_equation({"X", "E1", "E2"}, {"Y1", "Y2"}, coef, b);
  const auto noise =
      lbf::sweep(lbf::from_normal({"E1", "E2"}, vec({0.0, 0.0}), s), {"E1", "E2"});
  const auto m = lbf::combine(eq, noise);

  CHECK(swept_set_is(m, {"X", "E1", "E2"}));
  const MatrixXd sinv = -s.inverse();
  CHECK(m.entry("E1", "E1") == doctest::Approx(sinv(0, 0)));
  CHECK(m.entry("E1", "E2") == doctest::Approx(sinv(0, 1)));
  CHECK(m.entry("E2", "E2") == doctest::Approx(sinv(1, 1)));
  CHECK(m.entry("E1", "Y1") == doctest::Approx(1.0));
  CHECK(m.entry("E1", "Y2") == doctest::Approx(0.0));
  CHECK(m.entry("X", "Y2") == doctest::Approx(-1.0));
  CHECK(m.entry("Y1", "Y1") == 0.0);
  CHECK(m.mean_at("Y2") == doctest::Approx(0.1));

  const auto folded = lbf::marginalize(m, {"X", "Y1", "Y2"});
  const auto direct = lbf::from_regression({"X"}, {"Y1", "Y2"}, a, b, s);
  CHECK(lbf::max_abs_difference(direct, folded) < 1e-12);
}

TEST_CASE("sweeping a scalar normal") {
  const auto g = lbf::from_normal({"G"}, vec({-0.05}), scalar(0.0004));
  const auto s = lbf::sweep(g, {"G"});
  CHECK(s.is_swept("G"));
  CHECK(s.mean_at("G") == doctest::Approx(-125.0));
  CHECK(s.entry("G", "G") == doctest::Approx(-2500.0));

  const auto back = lbf::unsweep(s, {"G"});
  CHECK_FALSE(back.is_swept("G"));
  CHECK(back.mean_at("G") == doctest::Approx(-0.05));
  CHECK(back.entry("G", "G") == doctest::Approx(0.0004));
}

TEST_CASE("sweeping a joint exposes the conditional") {
  const VectorXd mu = vec({0.1, -0.2, 0.3});
  const MatrixXd sigma = mat({{2.0, 0.3, 0.5}, {0.3, 1.0, -0.2}, {0.5, -0.2, 1.5}});
  const auto m = lbf::sweep(lbf::from_normal({"X", "Y1", "Y2"}, mu, sigma), {"X"});

  const double s11 = sigma(0, 0);
  CHECK(m.mean_at("Y1") == doctest::Approx(mu(1) - mu(0) / s11 * sigma(0, 1)));
  CHECK(m.mean_at("Y2") == doctest::Approx(mu(2) - mu(0) / s11 * sigma(0, 2)));
  CHECK(m.entry("Y1", "Y2") == doctest::Approx(sigma(1, 2) - sigma(1, 0) * sigma(0, 2) / s11));
  CHECK(m.entry("Y1", "Y1") == doctest::Approx(sigma(1, 1) - sigma(1, 0) * sigma(0, 1) / s11));
  CHECK(m.entry("X", "Y1") == doctest::Approx(sigma(0, 1) / s11));
  CHECK(m.entry("Y1", "X") == doctest::Approx(sigma(1, 0) / s11));
  CHECK(m.entry("X", "X") == doctest::Approx(-1.0 / s11));
  CHECK(m.mean_at("X") == doctest::Approx(mu(0) / s11));
}

TEST_CASE("sweep order does not matter") {
  const auto m = lbf::from_normal({"A", "B", "C"}, vec({0.1, 0.2, 0.3}),
                                  mat({{1.0, 0.2, 0.1}, {0.2, 2.0, 0.4}, {0.1, 0.4, 1.5}}));
  const auto stepwise = lbf::sweep(lbf::sweep(m, {"A"}), {"B"});
  const auto together = lbf::sweep(m, {"A", "B"});
  const auto reversed = lbf::sweep(lbf::sweep(m, {"B"}), {"A"});
  CHECK(lbf::max_abs_difference(stepwise, together) < 1e-12);
  CHECK(lbf::max_abs_difference(reversed, together) < 1e-12);
}

TEST_CASE("sweep and unsweep errors") {
  const auto obs = lbf::from_observation({"X"}, vec({1.0}));
  CHECK_THROWS_AS(lbf::sweep(obs, {"X"}), lbf::SingularBlockError);
  CHECK_THROWS_AS(lbf::unsweep(lbf::vacuous({"X"}), {"X"}), lbf::SingularBlockError);

  const auto g = lbf::from_normal({"G"}, vec({0.0}), scalar(1.0));
  CHECK_THROWS_AS(lbf::unsweep(g, {"G"}), lbf::VariableError);
  CHECK_THROWS_AS(lbf::sweep(lbf::sweep(g, {"G"}), {"G"}), lbf::VariableError);
  CHECK_THROWS_AS(lbf::sweep(g, {"Z"}), lbf::VariableError);
}

TEST_CASE("marginalization") {
  // Stock block as published; P comes in through the blend equation.
  const VectorXd mu = vec({0.04, 0.0325, 0.035});
  const MatrixXd sigma = mat({{0.0076, 0.0007, 0.0009},
                              {0.0007, 0.0021, 0.0006},
                              {0.0009, 0.0006, 0.0032}});
  const auto stocks = lbf::from_normal({"S1", "S2", "S3"}, mu, sigma);
  const auto blend = lbf::from_linear_equation({"S1", "S2", "S3"}, {"P"},
                                               mat({{0.2}, {0.7}, {0.1}}), vec({0.0}));
  const auto table = lbf::permute(lbf::combine(lbf::sweep(stocks, {"S1", "S2", "S3"}), blend),
                                  {"P", "S1", "S2", "S3"});
  const auto joint = lbf::unsweep(table, {"S1", "S2", "S3"});
  const auto p = lbf::marginalize(joint, {"P"});
  CHECK(p.variables() == VariableList{"P"});
  CHECK(std::abs(p.mean_at("P") - 0.0343) <= 5e-5 + 1e-12);
  CHECK(std::abs(p.entry("P", "P") - 0.0017) <= 5e-5);

  // Swept joint: marginalizing out a swept variable unsweeps it first.
  const auto swept = lbf::sweep(joint, {"S1", "S2"});
  const auto s3 = lbf::to_summary(lbf::marginalize(swept, {"S3"}));
  CHECK(s3.mean_of("S3") == doctest::Approx(0.035));
  CHECK(s3.variance_of("S3") == doctest::Approx(0.0032));

  CHECK_THROWS_AS(lbf::marginalize(joint, {"Q"}), lbf::VariableError);
}

TEST_CASE("extension adds vacuous coordinates") {
  const auto g = lbf::from_normal({"G"}, vec({-0.05}), scalar(0.0004));
  const auto e = lbf::extend(g, {"M"});
  CHECK(e.variables() == VariableList{"G", "M"});
  CHECK(e.is_swept("M"));
  CHECK(e.mean_at("M") == 0.0);
  CHECK(e.entry("M", "M") == 0.0);
  CHECK(e.entry("G", "M") == 0.0);
  CHECK(e.entry("G", "G") == doctest::Approx(0.0004));
  CHECK_THROWS_AS(lbf::extend(g, {"G"}), lbf::VariableError);
}

TEST_CASE("combining two opinions on gold") {
  const auto prior = lbf::from_normal({"G"}, vec({-0.05}), scalar(0.02 * 0.02));
  const auto news = lbf::from_normal({"G"}, vec({0.04}), scalar(0.005 * 0.005));
  const auto both = lbf::to_summary(lbf::combine(prior, news));
  // precision-weighted mean and variance
  const double p1 = 1.0 / (0.02 * 0.02);
  const double p2 = 1.0 / (0.005 * 0.005);
  CHECK(both.mean_of("G") == doctest::Approx((-0.05 * p1 + 0.04 * p2) / (p1 + p2)).epsilon(1e-12));
  CHECK(both.variance_of("G") == doctest::Approx(1.0 / (p1 + p2)).epsilon(1e-12));
  CHECK(both.mean_of("G") == doctest::Approx(0.034706).epsilon(1e-5));
  CHECK(both.variance_of("G") == doctest::Approx(2.3529e-5).epsilon(1e-4));
}

TEST_CASE("combination extends to the union domain") {
  const auto g = lbf::from_normal({"G"}, vec({-0.05}), scalar(0.0004));
  const auto m = lbf::from_normal({"M"}, vec({0.1}), scalar(0.0064));
  const auto gm = lbf::combine(g, m);
  CHECK(gm.variables() == VariableList{"G", "M"});
  const auto s = lbf::to_summary(gm);
  CHECK(s.mean_of("M") == doctest::Approx(0.1));
  CHECK(s.variance_of("G") == doctest::Approx(0.0004));
  CHECK(s.covariance_of("G", "M") == doctest::Approx(0.0));
}

TEST_CASE("conditioning") {
  const VectorXd mu = vec({0.5, -0.1, 0.2});
  const MatrixXd sigma = mat({{1.0, 0.4, 0.2}, {0.4, 2.0, 0.3}, {0.2, 0.3, 0.8}});
  const auto m = lbf::from_normal({"X", "Y1", "Y2"}, mu, sigma);
  const double x = 1.3;
  const auto c = lbf::to_summary(lbf::condition(m, {"X"}, vec({x})));
  CHECK(c.variables == VariableList{"Y1", "Y2"});
  CHECK(c.mean_of("Y1") == doctest::Approx(mu(1) + (x - mu(0)) * sigma(0, 1) / sigma(0, 0)));
  CHECK(c.covariance_of("Y1", "Y2") ==
        doctest::Approx(sigma(1, 2) - sigma(1, 0) * sigma(0, 2) / sigma(0, 0)));

  // Independent rest is unchanged.
  const auto indep = lbf::from_normal({"X", "Y"}, vec({0.5, 0.1}), mat({{1.0, 0.0}, {0.0, 0.3}}));
  const auto y = lbf::to_summary(lbf::condition(indep, {"X"}, vec({0.5})));
  CHECK(y.mean_of("Y") == doctest::Approx(0.1));
  CHECK(y.variance_of("Y") == doctest::Approx(0.3));

  // Deterministic blend of observed stocks.
  const auto blend = lbf::from_linear_equation({"S1", "S2", "S3"}, {"P"},
                                               mat({{0.2}, {0.7}, {0.1}}), vec({0.0}));
  const auto p = lbf::to_summary(
      lbf::condition(blend, {"S1", "S2", "S3"}, vec({0.04, 0.0325, 0.035})));
  CHECK(p.mean_of("P") == doctest::Approx(0.03425).epsilon(1e-12));
  CHECK(p.variance_of("P") == doctest::Approx(0.0));
  CHECK(std::abs(p.mean_of("P") - 0.0343) <= 5e-5 + 1e-12);

  CHECK_THROWS_AS(lbf::condition(m, {"X"}, vec({1.0, 2.0})), lbf::DimensionError);
  CHECK_THROWS_AS(lbf::condition(m, {"Z"}, vec({1.0})), lbf::VariableError);
}

TEST_CASE("summaries") {
  const auto s1 = lbf::to_summary(lbf::from_normal({"S1"}, vec({0.04}), scalar(0.0076)));
  CHECK(s1.mean_of("S1") == doctest::Approx(0.04));
  CHECK(std::sqrt(s1.variance_of("S1")) == doctest::Approx(0.087).epsilon(0.01));

  const auto obs = lbf::to_summary(lbf::from_observation({"A", "B"}, vec({1.0, 2.0})));
  CHECK(obs.covariance.isZero());
  CHECK(obs.mean_of("B") == doctest::Approx(2.0));

  CHECK_THROWS_AS(lbf::to_summary(lbf::vacuous({"X"})), lbf::SingularBlockError);
}

TEST_CASE("structural invariants after operations") {
  const auto eq = lbf::from_linear_equation({"G", "M", "F1"}, {"S1"}, mat({{0.6}, {0.4}, {1.0}}),
                                            vec({0.03}));
  const auto g = lbf::from_normal({"G"}, vec({-0.05}), scalar(0.0004));
  const auto m = lbf::from_normal({"M"}, vec({0.1}), scalar(0.0064));
  const auto f = lbf::sweep(lbf::from_normal({"F1"}, vec({0.0}), scalar(0.0064)), {"F1"});
  const std::vector<MomentMatrix> results = {
      lbf::combine(eq, f), lbf::combine(lbf::combine(eq, f), g),
      lbf::combine(lbf::combine(lbf::combine(eq, f), g), m),
      lbf::marginalize(lbf::combine(lbf::combine(lbf::combine(eq, f), g), m), {"S1", "G"})};
  for (const auto& r : results) {
    CHECK((r.block() - r.block().transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    // Re-validation through the checked constructor.
    CHECK_NOTHROW(MomentMatrix(r.variables(), r.swept_flags(), r.mean(), r.block()));
  }
  const auto s1 = lbf::to_summary(results[3]);
  CHECK(s1.variance_of("S1") == doctest::Approx(0.36 * 0.0004 + 0.16 * 0.0064 + 0.0064));
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(MomentMatrix({"A"}, {false, true}, vec({0.0}), scalar(1.0)),
                  lbf::DimensionError);
  CHECK_THROWS_AS(MomentMatrix({"A"}, {false}, vec({0.0}), scalar(-1.0)), lbf::DomainError);
  CHECK_THROWS_AS(MomentMatrix({"A"}, {true}, vec({0.0}), scalar(1.0)), lbf::DomainError);
  CHECK_NOTHROW(MomentMatrix({"A"}, {true}, vec({0.0}), scalar(-1.0)));
  CHECK_THROWS_AS(MomentMatrix({""}, {false}, vec({0.0}), scalar(1.0)), lbf::VariableError);
  CHECK_THROWS_AS(MomentMatrix({"A", "B"}, {false, false}, vec({0.0, 0.0}), mat({{1, 0.5}, {0.4, 1}})),
                  lbf::DomainError);
  // Mixed entries are unconstrained in sign.
  CHECK_NOTHROW(MomentMatrix({"A", "B"}, {true, false}, vec({0.0, 0.0}), mat({{-1, 5}, {5, 1}})));
}
