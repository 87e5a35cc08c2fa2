#include <doctest.h>

#include <cmath>
#include <vector>

#include "powerpost/deviance.hpp"
#include "powerpost/examples.hpp"
#include "powerpost/random.hpp"
#include <array>
#include <limits>
#include <stdexcept>

using namespace powerpost;

TEST_CASE("example 1 analytic deviance hand values") {
  Example1Config cfg;
  const double y = 101.0;
  CHECK(ex1_analytic_deviance(cfg, y, 0.0) == doctest::Approx(-14.3633).epsilon(1e-4));
  CHECK(ex1_analytic_deviance(cfg, y, 0.0) ==
        doctest::Approx(-0.5 * (std::log(8.0 * M_PI) + 102.01 / 4.0)).epsilon(1e-12));
  CHECK(ex1_analytic_deviance(cfg, y, 1.0) == doctest::Approx(-2.0932).epsilon(1e-4));

  // degenerate prior: the deviance loses its alpha dependence
  Example1Config tight = cfg;
  tight.sigma_p2 = 1e-14;
  const double flat = -0.5 * (std::log(2.0 * M_PI * cfg.sigma_eps2) +
                              (y - cfg.a) * (y - cfg.a) / cfg.sigma_eps2);
  CHECK(ex1_analytic_deviance(tight, y, 0.2) == doctest::Approx(flat).epsilon(1e-8));
  CHECK(ex1_analytic_deviance(tight, y, 0.9) == doctest::Approx(flat).epsilon(1e-8));
}

TEST_CASE("example 1 analytic tractile: endpoint identity and MC oracle") {
  Example1Config cfg;
  const double y = 101.0;
  CHECK(ex1_analytic_tractile(cfg, y, 0.0) ==
        doctest::Approx(ex1_analytic_deviance(cfg, y, 0.0)).epsilon(1e-13));

  // brute-force E[p(y|theta) log p(y|theta)] over the prior at alpha = 1
  RandomStream rs(101);
  const double s = 0.5 / cfg.sigma_eps2;
  const double log_c = -0.5 * std::log(2.0 * M_PI * cfg.sigma_eps2);
  double acc = 0.0;
  const int n = 4000000;
  for (int i = 0; i < n; ++i) {
    const double theta = rs.normal(cfg.mu_p, std::sqrt(cfg.sigma_p2));
    const double resid = y - cfg.a * theta;
    const double ll = log_c - s * resid * resid;
    acc += std::exp(ll) * ll;
  }
  acc /= static_cast<double>(n);
  CHECK(ex1_analytic_tractile(cfg, y, 1.0) == doctest::Approx(acc).epsilon(0.02));
  CHECK(std::abs(ex1_analytic_tractile(cfg, y, 1.0) - acc) <= 1e-3);
}

TEST_CASE("example 1 evidence function is consistent with the tractile") {
  Example1Config cfg;
  const double y = 101.7;
  CHECK(ex1_analytic_evidence(cfg, y, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  // z' = h via central differences
  for (double a : {0.2, 0.5, 0.8}) {
    const double d = 1e-6;
    const double zp =
        (ex1_analytic_evidence(cfg, y, a + d) - ex1_analytic_evidence(cfg, y, a - d)) /
        (2.0 * d);
    CHECK(zp == doctest::Approx(ex1_analytic_tractile(cfg, y, a)).epsilon(1e-6));
  }
}

TEST_CASE("example 1 conjugate transition") {
  Example1Config cfg;
  const auto prior_stage = ex1_conjugate_transition(cfg, 111.1, 0.0);
  CHECK(prior_stage.mean == cfg.mu_p);
  CHECK(prior_stage.variance == doctest::Approx(cfg.sigma_p2).epsilon(1e-14));

  // alpha = 1, y = 111.1: precision 100 + 2550.25, mean (100 + 2805.275)/2650.25
  const auto post = ex1_conjugate_transition(cfg, 111.1, 1.0);
  CHECK(post.variance == doctest::Approx(1.0 / 2650.25).epsilon(1e-12));
  CHECK(post.mean == doctest::Approx(2905.275 / 2650.25).epsilon(1e-12));

  // symmetric update: data generated exactly at the prior mean
  const auto sym = ex1_conjugate_transition(cfg, cfg.a * cfg.mu_p, 1.0);
  CHECK(sym.mean == doctest::Approx(cfg.mu_p).epsilon(1e-12));
}

TEST_CASE("example 1 data generation is seeded and Gaussian") {
  Example1Config cfg;
  RandomStream a(5), b(5);
  CHECK(ex1_generate_data(cfg, a) == ex1_generate_data(cfg, b));
  RandomStream rs(6);
  double mean = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double y = ex1_generate_data(cfg, rs);
    mean += y;
    sq += y * y;
  }
  mean /= n;
  CHECK(mean == doctest::Approx(cfg.a * cfg.theta_t).epsilon(1e-3));
  CHECK(sq / n - mean * mean == doctest::Approx(cfg.sigma_eps2).epsilon(0.05));
}

TEST_CASE("example 2 initial pulse and forward solution") {
  CHECK(ex2_initial_pulse(0.0, 0.0, 0.5) ==
        doctest::Approx(0.5 * (1.0 + 2.0 * std::exp(-25.0))).epsilon(1e-12));
  CHECK(ex2_initial_pulse(1.3, 0.2, 0.0) == 0.0);
  for (double delta : {0.1, 0.37, 0.8}) {
    CHECK(ex2_initial_pulse(0.4 + delta, 0.4, 0.7) ==
          doctest::Approx(ex2_initial_pulse(0.4 - delta, 0.4, 0.7)).epsilon(1e-12));
  }

  // t = 0 recovers the initial condition
  CHECK(ex2_forward(0.0, 0.9, 0.1, 0.5) ==
        doctest::Approx(ex2_initial_pulse(0.9, 0.1, 0.5)).epsilon(1e-14));

  // linearity in the amplitude
  CHECK(ex2_forward(1.7, 0.3, 0.0, 1.0) ==
        doctest::Approx(2.0 * ex2_forward(1.7, 0.3, 0.0, 0.5)).epsilon(1e-12));

  // once the split pulses separate, each translate carries half the pulse
  const double t = 3.0;
  const double at_centre = ex2_forward(t, 0.0, 0.0, 0.5);
  const double expect = 0.5 * ex2_initial_pulse(-t, 0.0, 0.5) +
                        0.5 * ex2_initial_pulse(t, 0.0, 0.5);
  CHECK(at_centre == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("example 2 data generation") {
  Example2Config quiet;
  quiet.speckle_shape = 0.0;  // multiplicative noise off
  quiet.additive_lo = quiet.additive_hi = 0.0;
  const auto clean = ex2_generate_data(quiet, 0.0, 0.5, RandomStream(1));
  REQUIRE(clean.values.size() == 7);
  REQUIRE(clean.values[0].size() == 101);
  for (std::size_t r = 0; r < clean.values.size(); ++r) {
    for (std::size_t k = 0; k < clean.values[r].size(); ++k) {
      const double g = ex2_forward(k * clean.dt, quiet.receivers[r], 0.0, 0.5);
      CHECK(clean.values[r][k] == doctest::Approx(g).epsilon(1e-14));
    }
  }

  // additive noise alone stays inside its bounded support
  Example2Config addonly;
  addonly.speckle_shape = 0.0;
  const auto noisy = ex2_generate_data(addonly, 0.0, 0.0, RandomStream(2));
  for (const auto& sig : noisy.values) {
    for (double v : sig) {
      CHECK(v >= -0.25);
      CHECK(v <= 0.25);
    }
  }

  const auto d1 = ex2_generate_data(Example2Config{}, 0.0, 0.5, RandomStream(9));
  const auto d2 = ex2_generate_data(Example2Config{}, 0.0, 0.5, RandomStream(9));
  CHECK(d1.values == d2.values);
}

TEST_CASE("example 2 likelihood structure") {
  Example2Config cfg;
  cfg.n_t = 41;  // keep the forward model cheap
  WaveSourceModel model(cfg);
  const auto data = ex2_generate_data(cfg, cfg.x0_true, cfg.a_true, RandomStream(3));

  // s = 1: log p = -sum_r dW2
  const Theta theta1{0.1, 0.4, 1.0};
  const auto outputs = model.forward_outputs(theta1);
  double dw = 0.0;
  for (std::size_t r = 0; r < data.values.size(); ++r) {
    dw += wasserstein2_1d(data.values[r], outputs[r], data.dt);
  }
  CHECK(model.log_likelihood(data, theta1) == doctest::Approx(-dw).epsilon(1e-12));

  // perfect fit: only the s^{N_T} factor remains
  Example2Config quiet = cfg;
  quiet.speckle_shape = 0.0;
  quiet.additive_lo = quiet.additive_hi = 0.0;
  WaveSourceModel exact(quiet);
  const auto clean = ex2_generate_data(quiet, 0.2, 0.6, RandomStream(4));
  const Theta truth{0.2, 0.6, 0.7};
  CHECK(exact.log_likelihood(clean, truth) ==
        doctest::Approx(41.0 * std::log(0.7)).epsilon(1e-9));

  // doubling s adds N_T log 2 - s sum dW
  const Theta theta2{0.1, 0.4, 2.0};
  const double lp1 = model.log_likelihood(data, theta1);
  const double lp2 = model.log_likelihood(data, theta2);
  CHECK(lp2 - lp1 == doctest::Approx(41.0 * std::log(2.0) - dw).epsilon(1e-9));

  // s <= 0 leaves the domain
  CHECK(model.log_likelihood(data, Theta{0.0, 0.5, -1.0}) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("example 2 prior draws live in the declared box") {
  Example2Config cfg;
  const auto prior = ex2_prior(cfg);
  RandomStream rs(7);
  double s_mean = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    RandomStream sub = rs.substream(static_cast<std::uint64_t>(i));
    const auto t = prior.sample(sub);
    REQUIRE(t.size() == 3);
    CHECK(t[0] >= cfg.x0_lo);
    CHECK(t[0] <= cfg.x0_hi);
    CHECK(t[1] >= cfg.a_lo);
    CHECK(t[1] <= cfg.a_hi);
    CHECK(t[2] > 0.0);
    s_mean += t[2];
  }
  CHECK(s_mean / n == doctest::Approx(cfg.s_shape * cfg.s_scale).epsilon(0.02));
  CHECK(prior.log_pdf(Theta{0.0, 0.5, -0.1}) == -std::numeric_limits<double>::infinity());
  CHECK(std::isfinite(prior.log_pdf(Theta{0.0, 0.5, 0.1})));
}

TEST_CASE("example 3 data generation") {
  Example3Config cfg;
  cfg.sigma2 = 0.0;  // degenerate: data sit exactly on the modes
  cfg.n_data = 2000;
  const auto data = ex3_generate_data(cfg, RandomStream(11));
  std::vector<int> counts(cfg.modes.size(), 0);
  for (const auto& p : data.values) {
    bool matched = false;
    for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
      if (p[0] == cfg.modes[m][0] && p[1] == cfg.modes[m][1]) {
        ++counts[m];
        matched = true;
      }
    }
    CHECK(matched);
  }
  for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
    const double w = cfg.weights[m];
    const double se = std::sqrt(w * (1.0 - w) / cfg.n_data);
    CHECK(std::abs(counts[m] / 2000.0 - w) <= 3.0 * se);
  }

  Example3Config one;
  one.modes = {{4.0, 6.0}};
  one.weights = {1.0};
  one.sigma2 = 0.04;
  one.n_data = 5000;
  const auto cloud = ex3_generate_data(one, RandomStream(12));
  double mx = 0.0, my = 0.0;
  for (const auto& p : cloud.values) {
    mx += p[0];
    my += p[1];
  }
  CHECK(mx / 5000.0 == doctest::Approx(4.0).epsilon(0.01));
  CHECK(my / 5000.0 == doctest::Approx(6.0).epsilon(0.01));

  Example3Config empty;
  empty.n_data = 0;
  CHECK_THROWS_AS(ex3_generate_data(empty, RandomStream(0)), std::invalid_argument);
}

TEST_CASE("example 3 twenty-mode table") {
  const auto cfg = ex3_twenty_mode_config();
  REQUIRE(cfg.modes.size() == 20);
  REQUIRE(cfg.weights.size() == 20);
  CHECK(cfg.modes.front() == std::array<double, 2>{2.18, 5.76});
  CHECK(cfg.modes.back() == std::array<double, 2>{1.69, 8.11});
  double total = 0.0;
  for (double w : cfg.weights) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("example 3 data-kernel likelihood") {
  const double sigma2 = 0.01;
  DataKernelMixtureModel model(sigma2);

  Dataset single;
  single.values = {{3.0, 4.0}};
  CHECK(model.log_likelihood(single, Theta{3.0, 4.0}) ==
        doctest::Approx(-std::log(2.0 * M_PI * sigma2)).epsilon(1e-12));

  // two distant data points create two equal peaks
  Dataset pair;
  pair.values = {{2.0, 2.0}, {8.0, 8.0}};
  const double peak1 = model.log_likelihood(pair, Theta{2.0, 2.0});
  const double peak2 = model.log_likelihood(pair, Theta{8.0, 8.0});
  CHECK(peak1 == doctest::Approx(peak2).epsilon(1e-12));
  CHECK(peak1 > model.log_likelihood(pair, Theta{5.0, 5.0}));

  // far from all data the nearest-datum term dominates and decays monotonically
  const Theta far1{9.5, 9.5}, far2{9.8, 9.8};
  const double near_term = -std::log(2.0) - std::log(2.0 * M_PI * sigma2) -
                           0.5 * sq_euclidean(far1, pair.values[1]) / sigma2;
  CHECK(model.log_likelihood(pair, far1) == doctest::Approx(near_term).epsilon(1e-9));
  CHECK(model.log_likelihood(pair, far1) > model.log_likelihood(pair, far2));

  CHECK_THROWS_AS(DataKernelMixtureModel(0.0), std::invalid_argument);
  Dataset empty;
  CHECK_THROWS_AS(model.log_likelihood(empty, Theta{1.0, 1.0}), std::invalid_argument);
}
