#ifndef POWERPOST_POSTERIOR_HPP
#define POWERPOST_POSTERIOR_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "powerpost/deviance.hpp"
#include "powerpost/likelihood.hpp"
#include "powerpost/random.hpp"

namespace powerpost {

// Gridded transition density over a rectangular box (d <= 2). log_density
// holds the raw solution-formula values; normalization is recorded, never
// imposed, so the evidence prediction exp(int phi1) stays testable.
struct PowerPosteriorField {
  std::vector<std::array<double, 2>> box;  // per-dimension {low, high}
  int resolution = 0;                      // nodes per dimension
  double alpha = 0.0;
  std::vector<double> log_density;         // row-major over axis-0 major order
  double cell_measure = 0.0;               // product of node spacings
  double normalization_integral = 0.0;     // trapezoid of exp(log_density)
  std::uint64_t forward_evals = 0;         // fresh grid evaluations
  bool coverage_warning = false;           // box misses >0.1% prior mass

  std::size_t dim() const { return box.size(); }
  std::vector<double> axis_nodes(std::size_t axis) const;
  double spacing(std::size_t axis) const;
};

// Normalized nonnegative density values on the same kind of lattice.
struct GriddedDensity {
  std::vector<std::array<double, 2>> box;
  int resolution = 0;
  std::vector<double> values;
  double cell_measure = 0.0;

  std::size_t dim() const { return box.size(); }
  std::vector<double> axis_nodes(std::size_t axis) const;
};

// Normalizes raw nonnegative values to unit trapezoid integral.
GriddedDensity make_density(std::vector<std::array<double, 2>> box, int resolution,
                            std::vector<double> raw_values);

// log pi(theta) + alpha log p(Y|theta) - int_0^alpha phi1: the transition
// density in the log domain. Evaluates the forward model once; -inf outside
// the prior support.
double log_power_posterior(const LikelihoodModel& model, const Dataset& data,
                           const std::function<double(const Theta&)>& prior_log_pdf,
                           const DevianceCurve& curve, const Theta& theta,
                           double alpha);

// Lattice of log_power_posterior values. d <= 2, resolution >= 16. The
// coverage check draws a fixed-seed prior sample; a box holding less than
// 99.9% of it sets coverage_warning.
PowerPosteriorField grid_density(const LikelihoodModel& model, const Dataset& data,
                                 const Prior& prior, const DevianceCurve& curve,
                                 const std::vector<std::array<double, 2>>& box,
                                 int resolution, double alpha);

// trapezoid integral of exp(log_density) over the box
double normalization(const PowerPosteriorField& field);

// trapezoid moments of the (self-normalized) field along each axis
std::vector<double> field_mean(const PowerPosteriorField& field);
std::vector<double> field_variance(const PowerPosteriorField& field);

// 1-D marginal of a 2-D field along `keep_axis`, renormalized to unit mass
GriddedDensity marginal(const PowerPosteriorField& field, std::size_t keep_axis);

struct SirResult {
  std::vector<Theta> samples;
  double ess = 0.0;              // (sum w)^2 / sum w^2
  bool degeneracy_warning = false;  // ess < 10
};

// Sampling-importance-resampling over the prior draws: weights proportional
// to exp(alpha l_n) in the log domain, systematic resampling in sample-index
// order. No forward evaluations.
SirResult sir_sample(const PriorEnsemble& ens, double alpha, std::size_t n_out,
                     RandomStream stream);

// self-normalized importance weights exp(alpha l_n) / sum
std::vector<double> sir_weights(const PriorEnsemble& ens, double alpha);

// Inverse-CDF sampling on the piecewise-linear lattice CDF; 2-D fields
// sample the axis-0 marginal then the conditional slice.
std::vector<Theta> grid_inverse_cdf_sample(const PowerPosteriorField& field,
                                           std::size_t n_out, RandomStream stream);

// Density algebra: pointwise product and power, both renormalized.
GriddedDensity perturb(const GriddedDensity& f, const GriddedDensity& g);
GriddedDensity power(const GriddedDensity& f, double r);

// Field rescaled to unit mass, for display and for the density algebra.
GriddedDensity renormalize(const PowerPosteriorField& field);

struct LocalMaximum {
  Theta location;
  double density;  // relative to the global maximum
};

// Strict 8-neighbour (2 neighbours in 1-D) local maxima of the field with
// density above rel_threshold * global maximum, sorted by density.
std::vector<LocalMaximum> detect_local_maxima(const PowerPosteriorField& field,
                                              double rel_threshold = 0.1);

}  // namespace powerpost

#endif
