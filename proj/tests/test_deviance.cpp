#include <doctest.h>

#include <cmath>
#include <vector>

#include "powerpost/deviance.hpp"
#include "powerpost/errors.hpp"
#include "powerpost/examples.hpp"
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

using namespace powerpost;

namespace {

PriorEnsemble manual_ensemble(std::vector<double> log_liks) {
  PriorEnsemble ens;
  ens.log_liks = std::move(log_liks);
  ens.thetas.assign(ens.log_liks.size(), Theta{0.0});
  return ens;
}

struct Ex1Setup {
  Example1Config cfg;
  double y = 101.0;
  std::unique_ptr<GaussianLinearModel> model;
  Dataset data;
  Prior prior;

  Ex1Setup() {
    model = ex1_model(cfg);
    data = ex1_dataset(y);
    prior = ex1_prior(cfg);
  }
};

}  // namespace

TEST_CASE("build_ensemble caches N log-likelihoods deterministically") {
  Ex1Setup s;
  const auto e1 = build_ensemble(s.prior, *s.model, s.data, 2, RandomStream(3));
  const auto e2 = build_ensemble(s.prior, *s.model, s.data, 2, RandomStream(3));
  REQUIRE(e1.size() == 2);
  CHECK(e1.log_liks == e2.log_liks);
  CHECK(e1.thetas == e2.thetas);
  CHECK_THROWS_AS(build_ensemble(s.prior, *s.model, s.data, 1, RandomStream(3)),
                  std::invalid_argument);
}

TEST_CASE("build_ensemble evaluates the forward model exactly N times") {
  Ex1Setup s;
  s.model->reset_forward_evals();
  build_ensemble(s.prior, *s.model, s.data, 137, RandomStream(1));
  CHECK(s.model->forward_evals() == 137);
}

TEST_CASE("build_ensemble names the offending sample on a non-finite value") {
  Ex1Setup s;
  Prior bad = s.prior;
  bad.sample = [](RandomStream&) {
    return Theta{std::numeric_limits<double>::quiet_NaN()};
  };
  try {
    build_ensemble(bad, *s.model, s.data, 4, RandomStream(0));
    FAIL("expected numeric_error");
  } catch (const numeric_error& e) {
    CHECK(std::string(e.what()).find("sample 0") != std::string::npos);
  }
}

TEST_CASE("constant likelihood gives zero log-liks and zero tractile") {
  GaussianLinearModel model(1.0, 1.0 / (2.0 * M_PI));  // log C = 0
  Dataset data;
  data.values = {{0.0}};
  Prior prior;
  prior.log_pdf = [](const Theta&) { return 0.0; };
  prior.sample = [](RandomStream&) { return Theta{0.0}; };  // zero residual
  const auto ens = build_ensemble(prior, model, data, 8, RandomStream(0));
  for (double ll : ens.log_liks) CHECK(ll == doctest::Approx(0.0).epsilon(1e-14));
  for (double a : {0.0, 0.3, 1.0}) {
    CHECK(tractile_h(ens, a) == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("ensemble mean log-lik approaches the analytic prior deviance") {
  Ex1Setup s;
  const auto ens = build_ensemble(s.prior, *s.model, s.data, 200000, RandomStream(5));
  const double phi1_0 = ex1_analytic_deviance(s.cfg, s.y, 0.0);
  double mean = 0.0;
  for (double ll : ens.log_liks) mean += ll;
  mean /= static_cast<double>(ens.size());
  // Var(l) ~ 1e3, so the MC error at N = 2e5 is about 0.07
  CHECK(mean == doctest::Approx(phi1_0).epsilon(0.02));
}

TEST_CASE("tractile_h hand values") {
  const auto ens = manual_ensemble({-1.0, -2.0});
  CHECK(tractile_h(ens, 0.0) == doctest::Approx(-1.5).epsilon(1e-14));
  const double expect = (-std::exp(-1.0) - 2.0 * std::exp(-2.0)) / 2.0;
  CHECK(tractile_h(ens, 1.0) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(tractile_h(ens, 1.0) == doctest::Approx(-0.31928).epsilon(1e-4));
}

TEST_CASE("deviance curve from the analytic Example-1 tractile") {
  Ex1Setup s;
  auto h = [&](double a) { return ex1_analytic_tractile(s.cfg, s.y, a); };
  const auto curve = deviance_curve_from_tractile(h, make_grid(10, 11));
  CHECK(curve.phi1[0] == doctest::Approx(ex1_analytic_deviance(s.cfg, s.y, 0.0))
                             .epsilon(1e-12));
  CHECK(curve.phi1[0] == doctest::Approx(-14.3633).epsilon(1e-4));
  // the coarse grid carries a few-permille quadrature bias at alpha = 1
  CHECK(curve.phi1.back() == doctest::Approx(-2.0932).epsilon(5e-3));
  const auto fine = deviance_curve_from_tractile(h, make_grid(40, 11));
  CHECK(fine.phi1.back() == doctest::Approx(-2.0932).epsilon(1e-4));
  CHECK(fine.phi1.back() == doctest::Approx(ex1_analytic_deviance(s.cfg, s.y, 1.0))
                                .epsilon(1e-4));
  CHECK(curve.hbar[0] == 0.0);
  CHECK(curve.guard_events.empty());
  // stored identity
  for (std::size_t k = 0; k < curve.phi1.size(); ++k) {
    CHECK(curve.phi1[k] == curve.h[k] / (1.0 + curve.hbar[k]));
  }
}

TEST_CASE("expected_deviance: gridpoint exact, off-grid interpolated") {
  Ex1Setup s;
  auto h = [&](double a) { return ex1_analytic_tractile(s.cfg, s.y, a); };
  const auto curve = deviance_curve_from_tractile(h, make_grid(10, 11));
  CHECK(expected_deviance(curve, 0.3) == curve.phi1[3]);
  CHECK(expected_deviance(curve, 0.0) == curve.phi1[0]);
  const double mid = expected_deviance(curve, 0.35);
  CHECK(mid == doctest::Approx(ex1_analytic_deviance(s.cfg, s.y, 0.35)).epsilon(1e-3));
  CHECK_THROWS_AS(expected_deviance(curve, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(expected_deviance(curve, -0.1), std::invalid_argument);
}

TEST_CASE("evidence identity: quadrature vs direct log-domain estimate") {
  Ex1Setup s;
  const auto ens = build_ensemble(s.prior, *s.model, s.data, 20000, RandomStream(2));
  const auto curve = deviance_curve(ens, make_grid(100, 11));
  for (std::size_t k = 0; k < curve.grid.points.size(); ++k) {
    const double direct = std::exp(curve.log_z[k]);
    CHECK(std::abs((1.0 + curve.hbar[k]) - direct) / direct <= 1e-4);
  }
}

TEST_CASE("deviance curve is bit-identical across equal seeds") {
  Ex1Setup s;
  const auto e1 = build_ensemble(s.prior, *s.model, s.data, 500, RandomStream(11));
  const auto e2 = build_ensemble(s.prior, *s.model, s.data, 500, RandomStream(11));
  const auto c1 = deviance_curve(e1, make_grid(10, 11));
  const auto c2 = deviance_curve(e2, make_grid(10, 11));
  CHECK(c1.h == c2.h);
  CHECK(c1.hbar == c2.hbar);
  CHECK(c1.phi1 == c2.phi1);
  CHECK(c1.log_z == c2.log_z);
}

TEST_CASE("cancellation guard switches to the log-domain ratio") {
  // constant likelihood at -1e6: z decays below any linear-scale resolution
  const auto ens = manual_ensemble({-1e6, -1e6});
  const auto curve = deviance_curve(ens, make_grid(10, 11));
  CHECK(!curve.guard_events.empty());
  for (std::size_t k = 1; k < curve.phi1.size(); ++k) {
    CHECK(curve.phi1[k] == doctest::Approx(-1e6).epsilon(1e-9));
  }
}

TEST_CASE("non-uniform tempering grids are accepted") {
  Ex1Setup s;
  auto h = [&](double a) { return ex1_analytic_tractile(s.cfg, s.y, a); };
  // cluster points near the steep alpha -> 0 layer
  const auto grid = make_grid(
      std::vector<double>{0.0, 0.02, 0.05, 0.1, 0.2, 0.35, 0.55, 0.75, 1.0}, 11);
  const auto curve = deviance_curve_from_tractile(h, grid);
  for (std::size_t k = 0; k < grid.points.size(); ++k) {
    CHECK(curve.phi1[k] ==
          doctest::Approx(ex1_analytic_deviance(s.cfg, s.y, grid.points[k]))
              .epsilon(2e-3));
  }
  CHECK(curve.integral_phi1(1.0) ==
        doctest::Approx(std::log(ex1_analytic_evidence(s.cfg, s.y, 1.0)))
            .epsilon(1e-2));
  CHECK(expected_deviance(curve, 0.45) ==
        doctest::Approx(ex1_analytic_deviance(s.cfg, s.y, 0.45)).epsilon(5e-3));
}

TEST_CASE("quadrature collapse is an error for closed-form tractiles") {
  auto h = [](double) { return -10.0; };
  CHECK_THROWS_AS(deviance_curve_from_tractile(h, make_grid(10, 11)),
                  quadrature_collapse_error);
}

TEST_CASE("mgf identities") {
  Ex1Setup s;
  const auto ens = build_ensemble(s.prior, *s.model, s.data, 50000, RandomStream(4));
  const auto curve = deviance_curve(ens, make_grid(100, 11));

  // m(alpha, 0) = 1 up to quadrature + MC consistency
  for (double a : {0.0, 0.5, 1.0}) {
    CHECK(mgf(ens, curve, a, 0.0) == doctest::Approx(1.0).epsilon(2e-3));
  }

  // m(0, beta) equals the plain MC mean of p^beta
  const double beta = 0.35;
  double direct = 0.0;
  for (double ll : ens.log_liks) direct += std::exp(beta * ll);
  direct /= static_cast<double>(ens.size());
  CHECK(mgf(ens, curve, 0.0, beta) == doctest::Approx(direct).epsilon(1e-12));

  // finite-difference derivative at beta = 0 recovers phi1
  const double delta = 1e-6;
  for (double a : {0.0, 0.5, 1.0}) {
    const double fd = (mgf(ens, curve, a, delta) - mgf(ens, curve, a, 0.0)) / delta;
    const double phi = expected_deviance(curve, a);
    CHECK(fd / mgf(ens, curve, a, 0.0) == doctest::Approx(phi).epsilon(1e-3));
  }
}

TEST_CASE("moment ratio estimator and its recursion") {
  const auto ens = manual_ensemble({-1.0, -2.0, -0.5, -3.0});
  CHECK(moment_phi_n(ens, 0.7, 0) == 1.0);
  double mean = 0.0;
  for (double ll : ens.log_liks) mean += ll;
  mean /= 4.0;
  CHECK(moment_phi_n(ens, 0.0, 1) == doctest::Approx(mean).epsilon(1e-14));

  // d phi_n / d alpha = phi_{n+1} - phi_1 phi_n, second order in the step
  for (int n = 1; n <= 2; ++n) {
    auto residual = [&](double delta) {
      const double alpha = 0.5;
      const double fd =
          (moment_phi_n(ens, alpha + delta, n) - moment_phi_n(ens, alpha - delta, n)) /
          (2.0 * delta);
      const double rhs = moment_phi_n(ens, alpha, n + 1) -
                         moment_phi_n(ens, alpha, 1) * moment_phi_n(ens, alpha, n);
      return std::abs(fd - rhs);
    };
    const double r1 = residual(0.02);
    const double r2 = residual(0.01);
    const double r3 = residual(0.005);
    CHECK(r1 / r2 >= 3.0);
    CHECK(r2 / r3 >= 3.0);
  }
  CHECK_THROWS_AS(moment_phi_n(ens, 0.5, -1), std::invalid_argument);
}

TEST_CASE("bernoulli residual diagnostics") {
  // constant log-likelihood: phi1 == c solves the equation exactly
  const auto ens = manual_ensemble({-2.0, -2.0, -2.0});
  const auto curve = deviance_curve(ens, make_grid(100, 11));
  const auto res = bernoulli_residual(curve);
  REQUIRE(res.size() == curve.grid.points.size() - 2);
  for (double r : res) CHECK(r <= 1e-3);

  // two-point grid has no interior points
  const auto tiny = deviance_curve(ens, make_grid(1, 11));
  CHECK(bernoulli_residual(tiny).empty());
}

TEST_CASE("bernoulli residual marks vanishing-tractile points undefined") {
  DevianceCurve curve;
  curve.grid = make_grid(4, 11);
  curve.h = {1.0, 0.5, 0.0, -0.5, -1.0};
  curve.hbar = {0.0, 0.1, 0.12, 0.1, 0.0};
  curve.phi1 = {1.0, 0.45, 0.0, -0.45, -1.0};
  curve.log_z = {0.0, 0.0, 0.0, 0.0, 0.0};
  curve.finalize();
  const auto res = bernoulli_residual(curve);
  REQUIRE(res.size() == 3);
  CHECK(std::isfinite(res[0]));
  CHECK(std::isnan(res[1]));  // h(alpha_2) == 0
  CHECK(std::isfinite(res[2]));
}

TEST_CASE("bernoulli residual shrinks at 2nd order with the analytic tractile") {
  Ex1Setup s;
  auto h = [&](double a) { return ex1_analytic_tractile(s.cfg, s.y, a); };
  // clean 2nd-order decay at a fixed interior point (alpha = 0.5)
  auto res_at_half = [&](int n_alpha) {
    const auto curve = deviance_curve_from_tractile(h, make_grid(n_alpha, 11));
    return bernoulli_residual(curve)[static_cast<std::size_t>(n_alpha / 2) - 1];
  };
  const double r20 = res_at_half(20);
  const double r40 = res_at_half(40);
  const double r80 = res_at_half(80);
  CHECK(r20 / r40 >= 3.5);
  CHECK(r40 / r80 >= 3.5);

  // the max over interior points also decays, more slowly near the
  // steep alpha -> 0 layer
  auto max_res = [&](int n_alpha) {
    const auto curve = deviance_curve_from_tractile(h, make_grid(n_alpha, 11));
    double worst = 0.0;
    for (double r : bernoulli_residual(curve)) worst = std::max(worst, r);
    return worst;
  };
  CHECK(max_res(160) / max_res(320) >= 2.5);
}
