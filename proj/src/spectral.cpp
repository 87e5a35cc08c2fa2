#include "powerpost/spectral.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "powerpost/errors.hpp"

namespace powerpost {

namespace {
constexpr double kEscape = 1e15;
}

KernelTraceState::KernelTraceState(double s_, double log_c_likelihood_, double l1,
                                   double l2, double l3)
    : s(s_), log_c_likelihood(log_c_likelihood_), l1_0(l1), l2_0(l2), l3_0(l3) {
  if (!(l1 >= 0.0) || !(l2 >= 0.0)) {
    throw std::invalid_argument("KernelTraceState: traces must be nonnegative");
  }
  // Cauchy-Schwarz on nonnegative eigenvalues, with roundoff slack
  if (l2 > l1 * l1 * (1.0 + 1e-12) + 1e-300) {
    throw std::invalid_argument("KernelTraceState: L2 exceeds L1^2");
  }
  c = l2 - 0.5 * l1 * l1;
}

double kernel_eval(const Dataset& data,
                   const std::vector<std::vector<double>>& g_theta,
                   const std::vector<std::vector<double>>& g_eta) {
  if (g_theta.size() != data.values.size() || g_eta.size() != data.values.size()) {
    throw std::invalid_argument("kernel_eval: block count mismatch with data");
  }
  double acc = 0.0;
  for (std::size_t b = 0; b < data.values.size(); ++b) {
    const auto& y = data.values[b];
    const auto& gt = g_theta[b];
    const auto& ge = g_eta[b];
    if (gt.size() != y.size() || ge.size() != y.size()) {
      throw std::invalid_argument("kernel_eval: output length mismatch with data");
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
      acc += (y[i] - gt[i]) * (y[i] - ge[i]);
    }
  }
  return acc;
}

NystromTraces nystrom_traces(const PriorEnsemble& ens, const LikelihoodModel& model,
                             const Dataset& data) {
  (void)model;
  const std::size_t n = ens.size();
  if (ens.outputs.size() != n) {
    throw std::invalid_argument(
        "nystrom_traces: ensemble was built without cached forward outputs");
  }
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double k = kernel_eval(data, ens.outputs[i], ens.outputs[j]) /
                       static_cast<double>(n);
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = k;
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = k;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw numeric_error("nystrom_traces: eigen-solver failed");
  }
  NystromTraces out{0.0, 0.0, 0.0, 0.0};
  const auto& ev = solver.eigenvalues();
  out.min_eigenvalue = ev.minCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double lam = std::max(0.0, ev(i));
    out.l1 += lam;
    out.l2 += lam * lam;
    out.l3 += lam * lam * lam;
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> trace_ode_integrate(
    const KernelTraceState& state, const TemperingGrid& grid) {
  const double s = state.s;
  auto rhs = [s](double l1, double l2, double& d1, double& d2) {
    const double gap = l1 * l1 - l2;
    d1 = 2.0 * s * gap;
    d2 = 2.0 * s * l1 * gap;
  };
  std::vector<double> l1_out(grid.points.size()), l2_out(grid.points.size());
  double l1 = state.l1_0, l2 = state.l2_0;
  l1_out[0] = l1;
  l2_out[0] = l2;
  constexpr int kStepsPerInterval = 100;
  for (std::size_t k = 1; k < grid.points.size(); ++k) {
    const double h = (grid.points[k] - grid.points[k - 1]) / kStepsPerInterval;
    double alpha = grid.points[k - 1];
    for (int step = 0; step < kStepsPerInterval; ++step) {
      double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
      rhs(l1, l2, k1a, k1b);
      rhs(l1 + 0.5 * h * k1a, l2 + 0.5 * h * k1b, k2a, k2b);
      rhs(l1 + 0.5 * h * k2a, l2 + 0.5 * h * k2b, k3a, k3b);
      rhs(l1 + h * k3a, l2 + h * k3b, k4a, k4b);
      l1 += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
      l2 += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
      alpha += h;
      if (!std::isfinite(l1) || std::abs(l1) > kEscape) {
        throw finite_escape_error(
            "trace_ode_integrate: L1 escaped near alpha = " + std::to_string(alpha),
            alpha);
      }
    }
    l1_out[k] = l1;
    l2_out[k] = l2;
  }
  return {std::move(l1_out), std::move(l2_out)};
}

double trace_closed_form(const KernelTraceState& state, double alpha) {
  const double s = state.s;
  const double l1_0 = state.l1_0;
  const double c = state.c;
  if (alpha == 0.0) return l1_0;
  if (c < 0.0) {
    // L1' = s (L1^2 + |2c|): tangent branch, monotone growth to a pole
    const double k = std::sqrt(-2.0 * c);
    const double phi0 = std::atan(l1_0 / k);
    const double arg = s * k * alpha + phi0;
    if (std::abs(arg) >= M_PI / 2.0) {
      const double escape = (M_PI / 2.0 - phi0) / (s * k);
      throw finite_escape_error("trace_closed_form: tangent pole inside [0, alpha]",
                                escape);
    }
    return k * std::tan(arg);
  }
  if (c == 0.0) {
    const double denom = 1.0 - s * l1_0 * alpha;
    if (denom <= 0.0) {
      throw finite_escape_error("trace_closed_form: rational blow-up inside [0, alpha]",
                                1.0 / (s * l1_0));
    }
    return l1_0 / denom;
  }
  const double k = std::sqrt(2.0 * c);
  const double ratio = l1_0 / k;
  if (std::abs(std::abs(ratio) - 1.0) <= 1e-12) {
    return l1_0;  // fixed point L1 = +-sqrt(2c); rank-1 kernels land here
  }
  if (std::abs(ratio) < 1.0) {
    return k * std::tanh(std::atanh(ratio) - k * s * alpha);
  }
  // |L1| > sqrt(2c): coth branch, blows up where the argument crosses zero
  const double phi0 = 0.5 * std::log((ratio + 1.0) / (ratio - 1.0));
  const double arg = phi0 - k * s * alpha;
  if (ratio > 1.0 && arg <= 0.0) {
    throw finite_escape_error("trace_closed_form: coth pole inside [0, alpha]",
                              phi0 / (k * s));
  }
  const double e2 = std::exp(2.0 * arg);
  return k * (e2 + 1.0) / (e2 - 1.0);
}

double spectral_deviance(const KernelTraceState& state, double alpha) {
  return state.log_c_likelihood - state.s * trace_closed_form(state, alpha);
}

double skewness_gap(double l1, double l2, double l3) {
  return std::abs(l3 - 3.0 * l2 * l1 + 2.0 * l1 * l1 * l1);
}

}  // namespace powerpost
