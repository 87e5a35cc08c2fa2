#ifndef POWERPOST_EXAMPLES_HPP
#define POWERPOST_EXAMPLES_HPP

#include <array>
#include <memory>
#include <vector>

#include "powerpost/likelihood.hpp"
#include "powerpost/random.hpp"

namespace powerpost {

// ---------------------------------------------------------------------------
// Example 1: scalar linear model y = A theta + eps, Gaussian prior and noise.

struct Example1Config {
  double a = 101.0;
  double sigma_p2 = 1e-2;
  double sigma_eps2 = 4.0;
  double mu_p = 1.0;
  double theta_t = 1.1;
};

// Closed-form expected deviance; sigma_alpha^2 = A^2 sigma_p^2 alpha + sigma_eps^2.
double ex1_analytic_deviance(const Example1Config& cfg, double y, double alpha);

// Closed-form tractile h(alpha) = z(alpha) * Phi1(alpha) with the evidence
// z(alpha) = (2 pi s_eps^2)^(-alpha/2) (s_eps^2 / s_alpha^2)^(1/2)
//            exp(-alpha (y - A mu_p)^2 / (2 s_alpha^2)),
// which satisfies z' = h and z(0) = 1.
double ex1_analytic_tractile(const Example1Config& cfg, double y, double alpha);
double ex1_analytic_evidence(const Example1Config& cfg, double y, double alpha);

struct GaussianMoments {
  double mean;
  double variance;
};

// Conjugate transition: precision 1/sigma_p^2 + alpha A^2 / sigma_eps^2.
GaussianMoments ex1_conjugate_transition(const Example1Config& cfg, double y,
                                         double alpha);

double ex1_generate_data(const Example1Config& cfg, RandomStream& stream);
Dataset ex1_dataset(double y);
Prior ex1_prior(const Example1Config& cfg);
std::unique_ptr<GaussianLinearModel> ex1_model(const Example1Config& cfg);

// ---------------------------------------------------------------------------
// Example 2: 1-D wave source inversion with Wasserstein likelihood.
// theta = (x0, a, s); the dispersion s is inferred alongside the source.

struct Example2Config {
  std::vector<double> receivers = {-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0};
  double t_end = 5.0;
  int n_t = 101;
  double x0_true = 0.0;
  double a_true = 0.5;
  double speckle_shape = 60.0;   // multiplicative Gamma noise, mean 1
  double speckle_scale = 1.0 / 60.0;
  double additive_lo = -0.25;
  double additive_hi = 0.25;
  // Gamma(shape, scale) prior on the dispersion s, i.e. rate 0.1. With a
  // mean-0.1 prior instead, the s^{N_T} factor makes the alpha = 1 weights
  // collapse onto the largest drawn s regardless of misfit.
  double s_shape = 1.0;
  double s_scale = 10.0;
  double x0_lo = -1.0;           // uniform prior box for (x0, a)
  double x0_hi = 1.0;
  double a_lo = 0.0;
  double a_hi = 1.0;
};

// three-Gaussian pulse centred at x0 with side lobes at +-0.5
double ex2_initial_pulse(double x, double x0, double a);

// d'Alembert solution of the unit-speed wave equation
double ex2_forward(double t, double x, double x0, double a);

// per-receiver signals y(t_k, x_r) = eps1 * g(t_k, x_r, theta_t) + eps2
Dataset ex2_generate_data(const Example2Config& cfg, double x0, double a,
                          const RandomStream& stream);

// p(Y|theta) = s^{N_T} exp(-s sum_r dW2(y_r, g_r(theta))); s <= 0 gives -inf.
class WaveSourceModel : public LikelihoodModel {
public:
  explicit WaveSourceModel(Example2Config cfg);

  double distance(const Dataset& data,
                  const std::vector<std::vector<double>>& outputs) const override;
  double dispersion(const Theta& theta) const override { return theta[2]; }
  double log_normalizer(const Theta& theta) const override;
  bool in_domain(const Theta& theta) const override;

  const Example2Config& config() const { return cfg_; }

protected:
  std::vector<std::vector<double>> forward(const Theta& theta) const override;

private:
  Example2Config cfg_;
  std::vector<double> times_;
};

Prior ex2_prior(const Example2Config& cfg);

// (x0, a) slice of the wave model at a fixed dispersion, for 2-D grid fields.
class WaveSourceSliceModel : public LikelihoodModel {
public:
  WaveSourceSliceModel(Example2Config cfg, double s_fixed);

  double distance(const Dataset& data,
                  const std::vector<std::vector<double>>& outputs) const override;
  double dispersion(const Theta&) const override { return s_fixed_; }
  double log_normalizer(const Theta&) const override;

protected:
  std::vector<std::vector<double>> forward(const Theta& theta) const override;

private:
  WaveSourceModel inner_;
  double s_fixed_;
};

// uniform prior over the (x0, a) box alone
Prior ex2_prior_2d(const Example2Config& cfg);

// ---------------------------------------------------------------------------
// Example 3: bivariate multimodal inversion with a data-kernel likelihood.

struct Example3Config {
  std::vector<std::array<double, 2>> modes = {
      {2.18, 5.76}, {8.41, 1.68}, {5.54, 6.86}};
  std::vector<double> weights = {0.3, 0.5, 0.2};
  double sigma2 = 0.01;  // 0.1^2
  int n_data = 1000;
  std::array<double, 2> box_lo = {0.0, 0.0};
  std::array<double, 2> box_hi = {10.0, 10.0};
};

// the 20-mode configuration with equal weights 1/20
Example3Config ex3_twenty_mode_config();

// each datum: categorical mode index, then a 2-D Gaussian draw around it
Dataset ex3_generate_data(const Example3Config& cfg, const RandomStream& stream);

// p(Y|theta) = (1/N) sum_i N(y_i; theta, sigma^2 I_2), cast in exponential
// form with s = 1, log C = -log(2 pi sigma^2) and the nonnegative distance
// dis = log N - logsumexp_i(-|theta - y_i|^2 / (2 sigma^2)).
class DataKernelMixtureModel : public LikelihoodModel {
public:
  DataKernelMixtureModel(double sigma2);

  double distance(const Dataset& data,
                  const std::vector<std::vector<double>>& outputs) const override;
  double dispersion(const Theta&) const override { return 1.0; }
  double log_normalizer(const Theta&) const override { return log_c_; }

protected:
  std::vector<std::vector<double>> forward(const Theta& theta) const override;

private:
  double sigma2_;
  double log_c_;
};

Prior ex3_prior(const Example3Config& cfg);

}  // namespace powerpost

#endif
