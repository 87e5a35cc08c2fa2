#include "powerpost/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "powerpost/errors.hpp"

namespace powerpost {

double sq_euclidean(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("sq_euclidean: length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    acc += d * d;
  }
  return acc;
}

double wasserstein2_1d(std::span<const double> u, std::span<const double> v,
                       double dt, double eps) {
  const std::size_t n = u.size();
  if (n == 0 || v.size() != n) {
    throw std::invalid_argument("wasserstein2_1d: signals must have equal length >= 1");
  }
  double lo = std::numeric_limits<double>::infinity();
  for (double x : u) lo = std::min(lo, x);
  for (double x : v) lo = std::min(lo, x);
  if (!std::isfinite(lo)) {
    throw numeric_error("wasserstein2_1d: non-finite signal values");
  }
  std::vector<double> p(n), q(n);
  double pm = 0.0, qm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = u[i] - lo + eps;
    q[i] = v[i] - lo + eps;
    pm += p[i];
    qm += q[i];
  }
  if (!(pm > 0.0) || !(qm > 0.0)) {
    throw numeric_error(
        "wasserstein2_1d: zero total mass after min shift; signals are "
        "constant and equal with eps = 0");
  }
  // exact 1-D optimal transport between the two discrete quantile functions
  double w2 = 0.0;
  std::size_t i = 0, j = 0;
  double wa = p[0] / pm, wb = q[0] / qm;
  while (true) {
    const double m = std::min(wa, wb);
    const double d = (static_cast<double>(i) - static_cast<double>(j)) * dt;
    w2 += m * d * d;
    wa -= m;
    wb -= m;
    if (wa <= 0.0) {
      if (++i >= n) break;
      wa = p[i] / pm;
    }
    if (wb <= 0.0) {
      if (++j >= n) break;
      wb = q[j] / qm;
    }
  }
  return w2;
}

double LikelihoodModel::log_likelihood(const Dataset& data, const Theta& theta) const {
  if (!in_domain(theta)) return -std::numeric_limits<double>::infinity();
  const auto outputs = forward_outputs(theta);
  return log_normalizer(theta) - dispersion(theta) * distance(data, outputs);
}

std::vector<std::vector<double>> LikelihoodModel::forward_outputs(const Theta& theta) const {
  forward_evals_.fetch_add(1, std::memory_order_relaxed);
  return forward(theta);
}

GaussianLinearModel::GaussianLinearModel(double a, double sigma_eps2) : a_(a) {
  if (!(sigma_eps2 > 0.0)) {
    throw std::invalid_argument("GaussianLinearModel: sigma_eps2 must be > 0");
  }
  s_ = 0.5 / sigma_eps2;
  log_c_ = -0.5 * std::log(2.0 * M_PI * sigma_eps2);
}

double GaussianLinearModel::distance(const Dataset& data,
                                     const std::vector<std::vector<double>>& outputs) const {
  double acc = 0.0;
  for (std::size_t b = 0; b < data.values.size(); ++b) {
    acc += sq_euclidean(data.values[b], outputs[b]);
  }
  return acc;
}

std::vector<std::vector<double>> GaussianLinearModel::forward(const Theta& theta) const {
  if (theta.empty()) throw std::invalid_argument("GaussianLinearModel: empty theta");
  return {{a_ * theta[0]}};
}

}  // namespace powerpost
