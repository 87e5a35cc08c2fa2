#ifndef POWERPOST_LIKELIHOOD_HPP
#define POWERPOST_LIKELIHOOD_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "powerpost/random.hpp"

namespace powerpost {

using Theta = std::vector<double>;

// Observed data: one vector per block (a per-receiver signal, a point
// observation, ...). dt carries the time spacing for signal data.
struct Dataset {
  std::vector<std::vector<double>> values;
  double dt = 1.0;

  std::size_t blocks() const { return values.size(); }
};

// Prior density paired with its sampler so callers can both weight and draw.
struct Prior {
  std::function<double(const Theta&)> log_pdf;
  std::function<Theta(RandomStream&)> sample;
};

double sq_euclidean(std::span<const double> u, std::span<const double> v);

// Squared 2-Wasserstein distance between two signals on a common uniform
// grid with spacing dt. Both signals are shifted by their joint minimum,
// padded by eps per bin, normalized to unit mass, and matched exactly
// through their discrete quantile functions.
double wasserstein2_1d(std::span<const double> u, std::span<const double> v,
                       double dt = 1.0, double eps = 1e-12);

// Exponential-type likelihood p(Y|theta) = C exp(-s dis(Y, g(theta))).
// dispersion and log_normalizer take theta so models that infer the
// dispersion as a coordinate fit the same mold. forward_outputs is the only
// place the forward model runs; every call bumps the evaluation counter.
class LikelihoodModel {
public:
  virtual ~LikelihoodModel() = default;

  double log_likelihood(const Dataset& data, const Theta& theta) const;

  // outputs conformable with the data blocks; counts one forward evaluation
  std::vector<std::vector<double>> forward_outputs(const Theta& theta) const;

  virtual double distance(const Dataset& data,
                          const std::vector<std::vector<double>>& outputs) const = 0;
  virtual double dispersion(const Theta& theta) const = 0;
  virtual double log_normalizer(const Theta& theta) const = 0;
  virtual bool in_domain(const Theta&) const { return true; }

  std::uint64_t forward_evals() const { return forward_evals_.load(); }
  void reset_forward_evals() const { forward_evals_.store(0); }

protected:
  virtual std::vector<std::vector<double>> forward(const Theta& theta) const = 0;

private:
  mutable std::atomic<std::uint64_t> forward_evals_{0};
};

// y = A*theta + eps with eps ~ N(0, sigma_eps2): s = 1/(2 sigma_eps2),
// log C = -log(2 pi sigma_eps2)/2, dis = squared residual.
class GaussianLinearModel : public LikelihoodModel {
public:
  GaussianLinearModel(double a, double sigma_eps2);

  double distance(const Dataset& data,
                  const std::vector<std::vector<double>>& outputs) const override;
  double dispersion(const Theta&) const override { return s_; }
  double log_normalizer(const Theta&) const override { return log_c_; }

protected:
  std::vector<std::vector<double>> forward(const Theta& theta) const override;

private:
  double a_;
  double s_;
  double log_c_;
};

}  // namespace powerpost

#endif
