#ifndef POWERPOST_DEVIANCE_HPP
#define POWERPOST_DEVIANCE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "powerpost/likelihood.hpp"
#include "powerpost/numerics.hpp"
#include "powerpost/random.hpp"

namespace powerpost {

// Prior draws with their cached log-likelihoods. This is the only place the
// forward model runs for the tempering pipeline: exactly N evaluations, all
// at the prior stage. Forward outputs are kept for the spectral pathway.
struct PriorEnsemble {
  std::vector<Theta> thetas;
  std::vector<double> log_liks;
  std::vector<std::vector<std::vector<double>>> outputs;
  std::uint64_t seed = 0;

  std::size_t size() const { return thetas.size(); }
};

// Draw N prior samples and cache log p(Y|theta_n). Sample n uses substream n
// of `stream`, so results do not depend on evaluation order. Throws
// numeric_error naming the sample index if a log-likelihood is non-finite.
PriorEnsemble build_ensemble(const Prior& prior, const LikelihoodModel& model,
                             const Dataset& data, std::size_t n,
                             const RandomStream& stream, bool store_outputs = true);

// h(alpha) = (1/N) sum_n exp(alpha l_n) l_n, accumulated in the signed log
// domain (max shift on alpha*l_n + log|l_n|).
SignedLogValue tractile_h_log(const PriorEnsemble& ens, double alpha);
double tractile_h(const PriorEnsemble& ens, double alpha);

// Per-gridpoint tractile h, cumulative tempering integral hbar, expected
// deviance phi1 = h / (1 + hbar), and the direct log-domain evidence
// estimate log_z kept for the cancellation guard.
class DevianceCurve {
public:
  TemperingGrid grid;
  std::vector<double> h;
  std::vector<double> hbar;
  std::vector<double> phi1;
  std::vector<double> log_z;

  // gridpoints where phi1 fell back to the h / exp(log_z) ratio form
  std::vector<std::size_t> guard_events;

  // int_0^alpha phi1 d tau; gridpoint values use 4th-order Newton-Cotes on
  // the stored phi1, off-grid tails integrate the monotone cubic
  double integral_phi1(double alpha) const;

  // monotone-cubic interpolant of phi1 (exact at gridpoints)
  double phi1_at(double alpha) const;

  void finalize();  // builds the interpolant and cumulative integral

private:
  std::vector<double> iphi_;
  MonotoneCubic interp_;
};

// Builds the curve: h at every gridpoint and Simpson sub-node from the
// cached l_n,
// hbar accumulated interval by interval, phi1 = h / (1 + hbar). Throws
// quadrature_collapse_error if 1 + hbar <= 0 at a gridpoint.
DevianceCurve deviance_curve(const PriorEnsemble& ens, const TemperingGrid& grid);

// Same construction but with a closed-form tractile instead of the Monte
// Carlo one; log_z is then the log of the quadrature evidence itself.
DevianceCurve deviance_curve_from_tractile(const std::function<double(double)>& h,
                                           const TemperingGrid& grid);

// phi1 at a gridpoint exactly, monotone-cubic between gridpoints.
// alpha outside [0,1] is a parameter error.
double expected_deviance(const DevianceCurve& curve, double alpha);

// m(alpha, beta) = E[p^(alpha+beta)] exp(-int_0^alpha phi1), the MC
// expectation taken over the prior ensemble in the log domain.
double mgf(const PriorEnsemble& ens, const DevianceCurve& curve, double alpha,
           double beta);

// MGF with E[p^(alpha+beta)] = 1 + int_0^(alpha+beta) h, for closed-form
// tractile functions (the integral uses a fine fixed Simpson rule).
double mgf_from_tractile(const std::function<double(double)>& h,
                         const DevianceCurve& curve, double alpha, double beta);

// Phi_n(alpha) = E_{theta|Y;alpha}[log^n p], the self-normalized ratio
// estimator over the prior draws. Phi_0 = 1 exactly.
double moment_phi_n(const PriorEnsemble& ens, double alpha, int n);

// |phi1' - (h'/h) phi1 + phi1^2| at interior gridpoints, by central
// differences; NaN marks points where h vanishes. Diagnostic only.
std::vector<double> bernoulli_residual(const DevianceCurve& curve);

}  // namespace powerpost

#endif
