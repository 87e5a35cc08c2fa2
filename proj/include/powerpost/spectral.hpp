#ifndef POWERPOST_SPECTRAL_HPP
#define POWERPOST_SPECTRAL_HPP

#include <utility>
#include <vector>

#include "powerpost/deviance.hpp"
#include "powerpost/likelihood.hpp"
#include "powerpost/numerics.hpp"

namespace powerpost {

// Initial kernel traces L1 = sum lambda, L2 = sum lambda^2, L3 = sum lambda^3
// plus the constant c = L2 - L1^2/2 conserved by the trace ODEs.
struct KernelTraceState {
  double s;
  double log_c_likelihood;  // log C of the model
  double l1_0;
  double l2_0;
  double l3_0;
  double c;

  KernelTraceState(double s, double log_c_likelihood, double l1, double l2, double l3);
};

// K(theta, eta) = <Y - g(theta), Y - g(eta)>, the Euclidean residual inner
// product summed over data blocks. Diagonal equals the L2 distance.
double kernel_eval(const Dataset& data,
                   const std::vector<std::vector<double>>& g_theta,
                   const std::vector<std::vector<double>>& g_eta);

struct NystromTraces {
  double l1;
  double l2;
  double l3;
  double min_eigenvalue;  // before clamping, for the PSD check
};

// Eigenvalues of M_ij = K(theta_i, theta_j) / N over the prior draws;
// negative eigenvalues are roundoff and get clamped at zero.
NystromTraces nystrom_traces(const PriorEnsemble& ens, const LikelihoodModel& model,
                             const Dataset& data);

// Classical RK4 on L1' = 2s(L1^2 - L2), L2' = 2s L1 (L1^2 - L2) with 100
// steps per grid interval. Throws finite_escape_error past |L1| = 1e15.
std::pair<std::vector<double>, std::vector<double>> trace_ode_integrate(
    const KernelTraceState& state, const TemperingGrid& grid);

// Closed-form L1(alpha) of the reduced Riccati equation L1' = s (L1^2 - 2c),
// branch chosen by the sign of c: tangent (c < 0), tanh/coth (c > 0),
// rational (c = 0). Throws finite_escape_error if a pole lies in [0, alpha].
double trace_closed_form(const KernelTraceState& state, double alpha);

// spectral expected deviance log C - s L1(alpha)
double spectral_deviance(const KernelTraceState& state, double alpha);

// |L3 - 3 L2 L1 + 2 L1^3|: magnitude of the null-skewness closure violation
double skewness_gap(double l1, double l2, double l3);

}  // namespace powerpost

#endif
