#ifndef POWERPOST_ERRORS_HPP
#define POWERPOST_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace powerpost {

// Model or data produced an unusable value (non-finite log-likelihood,
// degenerate normalization, eigen-solver failure, ...).
class numeric_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// 1 + hbar(alpha) <= 0: the tempering quadrature collapsed. Advise a finer
// grid or the log-domain fallback.
class quadrature_collapse_error : public numeric_error {
public:
  quadrature_collapse_error(const std::string& what, double alpha)
      : numeric_error(what), alpha_(alpha) {}
  double alpha() const { return alpha_; }

private:
  double alpha_;
};

// Trace ODE / closed-form branch blew up inside [0, alpha].
class finite_escape_error : public numeric_error {
public:
  finite_escape_error(const std::string& what, double escape_alpha)
      : numeric_error(what), escape_alpha_(escape_alpha) {}
  double escape_alpha() const { return escape_alpha_; }

private:
  double escape_alpha_;
};

}  // namespace powerpost

#endif
