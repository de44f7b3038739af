#include "doctest.h"

#include "eegconn/mvar.hpp"
#include "eegconn/random.hpp"
#include "eegconn/synthetic.hpp"

#include <cmath>

using namespace eegconn;

namespace {

VarGroundTruth unidirectional(std::uint64_t seed) {
  Eigen::MatrixXd a(2, 2);
  a << 0.5, 0.0, 0.4, 0.5;
  VarGroundTruth gt;
  gt.coefficients = {a};
  gt.noise_covariance = Eigen::MatrixXd::Identity(2, 2);
  gt.seed = seed;
  return gt;
}

VarGroundTruth var3(std::uint64_t seed) {
  Eigen::MatrixXd a1(3, 3), a2(3, 3), a3(3, 3);
  a1 << 0.4, 0.0, 0.0, 0.2, 0.3, 0.0, 0.0, 0.0, 0.3;
  a2 << -0.2, 0.0, 0.0, 0.0, -0.1, 0.0, 0.0, 0.2, 0.0;
  a3 << 0.0, 0.0, 0.3, 0.0, 0.0, 0.0, 0.25, 0.0, -0.2;
  VarGroundTruth gt;
  gt.coefficients = {a1, a2, a3};
  gt.noise_covariance = Eigen::MatrixXd::Identity(3, 3);
  gt.seed = seed;
  return gt;
}

}  // namespace

TEST_CASE("white noise fits near-zero coefficients") {
  VarGroundTruth gt;
  gt.coefficients = {Eigen::MatrixXd::Zero(3, 3)};
  gt.noise_covariance = Eigen::MatrixXd::Identity(3, 3);
  gt.seed = 1;
  const auto m = fit_mvar(generate_var(gt, 20000), 1);
  CHECK(m.coefficients[0].cwiseAbs().maxCoeff() < 0.05);
  CHECK(m.stable);
}

TEST_CASE("bivariate VAR(1) recovery and residual covariance") {
  const auto gt = unidirectional(2);
  const auto m = fit_mvar(generate_var(gt, 20000), 1);
  REQUIRE(m.order() == 1);
  CHECK((m.coefficients[0] - gt.coefficients[0]).cwiseAbs().maxCoeff() <= 0.05);
  CHECK((m.noise_covariance - gt.noise_covariance).norm() <= 0.1 * gt.noise_covariance.norm());
  CHECK(m.spectral_radius == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("order selection") {
  int hits1 = 0, hits3 = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    hits1 += select_order(generate_var(unidirectional(100 + s), 20000), 8) == 1;
    hits3 += select_order(generate_var(var3(200 + s), 20000), 8) == 3;
  }
  CHECK(hits1 >= 9);
  CHECK(hits3 >= 8);
  const auto crit = order_criteria(generate_var(var3(7), 5000), 5);
  CHECK(crit.size() == 5);
}

TEST_CASE("fit errors") {
  auto rec = generate_var(unidirectional(3), 1000);
  rec.data.col(1).setConstant(2.0);
  CHECK_THROWS_AS(fit_mvar(rec, 1), std::invalid_argument);
  const auto short_rec = generate_var(unidirectional(3), 30);
  CHECK_THROWS_AS(fit_mvar(short_rec, 2), std::invalid_argument);
  CHECK_THROWS_AS(fit_mvar(generate_var(unidirectional(3), 1000), 0), std::invalid_argument);
}

TEST_CASE("pdc analytic value at zero frequency") {
  const auto gt = unidirectional(0);
  const auto pdc = pdc_spectrum(gt.coefficients, {0.0});
  CHECK(std::abs(pdc[0](1, 0)) == doctest::Approx(0.4 / std::sqrt(0.41)).epsilon(1e-12));
  CHECK(std::abs(pdc[0](0, 1)) == 0.0);
  const auto a = coefficient_spectrum(gt.coefficients, 0.0);
  CHECK(a(0, 0).real() == doctest::Approx(0.5));
  CHECK(a(1, 0).real() == doctest::Approx(-0.4));
}

TEST_CASE("pdc columns have unit norm") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Eigen::MatrixXd> coeffs;
    for (int r = 0; r < 3; ++r) {
      Eigen::MatrixXd a(4, 4);
      for (auto& v : a.reshaped()) v = 0.2 * rng.normal();
      coeffs.push_back(a);
    }
    for (const auto& m : pdc_spectrum(coeffs, {0.0, 0.1, 0.25, 0.5})) {
      CHECK((m.colwise().squaredNorm().array() - 1.0).abs().maxCoeff() <= 1e-12);
    }
  }
  CHECK_THROWS_AS(pdc_spectrum({Eigen::MatrixXd::Zero(2, 2)}, {0.7}), std::invalid_argument);
}

TEST_CASE("fitted pdc matrix matches the analytic one") {
  const auto gt = unidirectional(5);
  const auto analytic = pdc_matrix(gt.coefficients, kBetaBand, 256);
  const auto fitted = pdc_matrix(fit_mvar(generate_var(gt, 20000), 1), kBetaBand, 256);
  CHECK(fitted.metric == Metric::pdc);
  CHECK((fitted.values - analytic.values).cwiseAbs().maxCoeff() <= 0.05);
  CHECK(fitted.values(1, 0) > 0.3);
  CHECK(fitted.values(0, 1) < 0.05);
}

TEST_CASE("pdc band errors") {
  const auto gt = unidirectional(0);
  CHECK_THROWS_AS(pdc_matrix(gt.coefficients, Band{20, 10}, 256), std::invalid_argument);
  CHECK_THROWS_AS(pdc_matrix(gt.coefficients, Band{20, 200}, 256), std::invalid_argument);
}
