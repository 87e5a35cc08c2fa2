#ifndef POWERPOST_NUMERICS_HPP
#define POWERPOST_NUMERICS_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace powerpost {

// Ordered tempering points 0 = alpha_0 <= ... <= alpha_N = 1 plus the odd
// number of Simpson nodes used inside each interval.
struct TemperingGrid {
  std::vector<double> points;
  int sub_points = 11;

  std::size_t size() const { return points.size(); }
  std::size_t intervals() const { return points.size() - 1; }
};

// Uniform grid alpha_k = k / n_alpha. sub_points must be odd >= 3 so each
// interval holds an even number of Simpson panels.
TemperingGrid make_grid(int n_alpha, int sub_points = 11);

// Grid from an explicit point list (must start at 0, end at 1, strictly
// increasing).
TemperingGrid make_grid(std::vector<double> points, int sub_points = 11);

// Composite Simpson rule over equally spaced nodes (odd count >= 3).
double simpson_integrate(std::span<const double> values, double step);

// A real number kept as sign * exp(log_magnitude). sign == 0 means exactly
// zero and the magnitude is ignored.
struct SignedLogValue {
  int sign = 0;
  double log_magnitude = -std::numeric_limits<double>::infinity();

  static SignedLogValue from_value(double x);
  static SignedLogValue from_log(int sign, double log_magnitude);
  static SignedLogValue zero() { return {}; }

  double value() const;          // may overflow/underflow the double range
  bool is_zero() const { return sign == 0; }
  SignedLogValue negate() const { return {-sign, log_magnitude}; }
  // multiply by a plain real (kept in log domain)
  SignedLogValue scaled(double factor) const;
};

// Max-shifted signed accumulation of a list of SignedLogValues. Stable for
// log magnitudes up to about +-1e6; exact cancellation yields the zero value.
SignedLogValue signed_lse_sum(std::span<const SignedLogValue> terms);

// (1/N) * sum(terms); throws std::invalid_argument on an empty list.
SignedLogValue signed_lse_mean(std::span<const SignedLogValue> terms);

// log(sum exp(x_i)) with the usual max shift; -inf on an empty span.
double log_sum_exp(std::span<const double> log_terms);

// Fritsch--Carlson monotone cubic interpolant. Used for off-grid queries of
// gridpoint-only quantities; never overshoots the data.
class MonotoneCubic {
public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  // exact integral of the piecewise cubic over [a, b] within the data range
  double integrate(double a, double b) const;

private:
  std::vector<double> x_, y_, d_;  // nodes, values, node derivatives
  std::size_t locate(double x) const;
};

// Cumulative integral of gridpoint values: result[k] ~ int_{x0}^{xk} y dx.
// Uniform grids use 4th-order Newton--Cotes (Simpson + 3/8 closers);
// non-uniform grids integrate the monotone cubic interpolant.
std::vector<double> cumulative_integral(std::span<const double> x,
                                        std::span<const double> y);

}  // namespace powerpost

#endif
