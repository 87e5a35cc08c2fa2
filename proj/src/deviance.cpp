#include "powerpost/deviance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "powerpost/errors.hpp"

namespace powerpost {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// relative gap below which 1 + hbar is treated as cancelled out
constexpr double kGuardTol = 1e-6;

SignedLogValue h_term(double log_lik, double alpha) {
  if (log_lik == 0.0) return SignedLogValue::zero();
  const int sign = log_lik > 0.0 ? 1 : -1;
  return SignedLogValue::from_log(sign, alpha * log_lik + std::log(std::abs(log_lik)));
}

}  // namespace

PriorEnsemble build_ensemble(const Prior& prior, const LikelihoodModel& model,
                             const Dataset& data, std::size_t n,
                             const RandomStream& stream, bool store_outputs) {
  if (n < 2) throw std::invalid_argument("build_ensemble: need N >= 2 samples");
  PriorEnsemble ens;
  ens.seed = stream.seed();
  ens.thetas.resize(n);
  ens.log_liks.resize(n);
  if (store_outputs) ens.outputs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream sub = stream.substream(i);
    ens.thetas[i] = prior.sample(sub);
    auto outputs = model.forward_outputs(ens.thetas[i]);
    const Theta& theta = ens.thetas[i];
    const double ll = model.in_domain(theta)
                          ? model.log_normalizer(theta) -
                                model.dispersion(theta) * model.distance(data, outputs)
                          : -kInf;
    if (!std::isfinite(ll)) {
      throw numeric_error("build_ensemble: non-finite log-likelihood at sample " +
                          std::to_string(i));
    }
    ens.log_liks[i] = ll;
    if (store_outputs) ens.outputs[i] = std::move(outputs);
  }
  return ens;
}

SignedLogValue tractile_h_log(const PriorEnsemble& ens, double alpha) {
  std::vector<SignedLogValue> terms(ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i) {
    terms[i] = h_term(ens.log_liks[i], alpha);
  }
  return signed_lse_mean(terms);
}

double tractile_h(const PriorEnsemble& ens, double alpha) {
  return tractile_h_log(ens, alpha).value();
}

void DevianceCurve::finalize() {
  iphi_ = cumulative_integral(grid.points, phi1);
  interp_ = MonotoneCubic(grid.points, phi1);
}

double DevianceCurve::integral_phi1(double alpha) const {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("integral_phi1: alpha must be in [0, 1]");
  }
  const auto& pts = grid.points;
  auto it = std::upper_bound(pts.begin(), pts.end(), alpha);
  std::size_t k = static_cast<std::size_t>(it - pts.begin());
  if (k > 0) --k;
  if (k >= pts.size() - 1 && alpha >= pts.back()) return iphi_.back();
  double acc = iphi_[k];
  if (alpha > pts[k]) acc += interp_.integrate(pts[k], alpha);
  return acc;
}

double DevianceCurve::phi1_at(double alpha) const { return interp_(alpha); }

namespace {

// Shared curve construction: h evaluated at gridpoints and Simpson sub-nodes,
// hbar accumulated interval by interval in the signed log domain so interval
// integrals of any scale combine safely.
DevianceCurve build_curve(const std::function<SignedLogValue(double)>& h_eval,
                          const TemperingGrid& grid,
                          const std::function<double(double)>& direct_log_z) {
  DevianceCurve curve;
  curve.grid = grid;
  const std::size_t n_pts = grid.points.size();
  curve.h.resize(n_pts);
  curve.hbar.resize(n_pts);
  curve.phi1.resize(n_pts);
  curve.log_z.resize(n_pts);

  std::vector<SignedLogValue> h_at_points(n_pts);
  std::vector<SignedLogValue> hbar_acc(n_pts);
  h_at_points[0] = h_eval(grid.points[0]);
  hbar_acc[0] = SignedLogValue::zero();

  const int sub = grid.sub_points;
  std::vector<SignedLogValue> weighted(static_cast<std::size_t>(sub));
  std::vector<SignedLogValue> pair(2);

  SignedLogValue hbar = SignedLogValue::zero();
  for (std::size_t k = 1; k < n_pts; ++k) {
    const double a0 = grid.points[k - 1];
    const double a1 = grid.points[k];
    const double step = (a1 - a0) / (sub - 1);
    for (int j = 0; j < sub; ++j) {
      const double x = (j == sub - 1) ? a1 : a0 + j * step;
      SignedLogValue hj = (j == 0) ? h_at_points[k - 1] : h_eval(x);
      if (j == sub - 1) h_at_points[k] = hj;
      const double w = (j == 0 || j == sub - 1) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      weighted[static_cast<std::size_t>(j)] = hj.scaled(w * step / 3.0);
    }
    pair[0] = hbar;
    pair[1] = signed_lse_sum(weighted);
    hbar = signed_lse_sum(pair);
    hbar_acc[k] = hbar;
  }

  const SignedLogValue one = SignedLogValue::from_value(1.0);
  for (std::size_t k = 0; k < n_pts; ++k) {
    curve.h[k] = h_at_points[k].value();
    curve.hbar[k] = hbar_acc[k].value();
    pair[0] = one;
    pair[1] = hbar_acc[k];
    const SignedLogValue z_quad = signed_lse_sum(pair);
    const double one_plus = 1.0 + curve.hbar[k];

    // Cancellation guard. phi1 falls back to the ratio against the
    // log-domain evidence when 1 + hbar is noise relative to hbar, and for
    // the sample-based path also when the quadrature evidence disagrees with
    // the direct log-domain estimate by more than a factor of two (the
    // unresolved-integrand regime leaves positive junk that the relative
    // test alone cannot see).
    bool cancelled = std::abs(one_plus) < kGuardTol * std::abs(curve.hbar[k]) ||
                     !std::isfinite(one_plus) || !std::isfinite(curve.h[k]);
    if (direct_log_z) {
      curve.log_z[k] = direct_log_z(grid.points[k]);
      const bool mismatch =
          one_plus <= 0.0 ||
          std::abs(std::log(one_plus) - curve.log_z[k]) > std::log(2.0);
      cancelled = cancelled || mismatch;
    } else {
      // closed-form tractiles have no sample-based evidence to fall back on
      if (z_quad.sign <= 0) {
        throw quadrature_collapse_error(
            "deviance_curve: 1 + hbar <= 0 at alpha = " +
                std::to_string(grid.points[k]) +
                "; refine the tempering grid or build the curve from prior "
                "samples to enable the log-domain fallback",
            grid.points[k]);
      }
      curve.log_z[k] = z_quad.log_magnitude;
    }
    if (cancelled) {
      const SignedLogValue& hk = h_at_points[k];
      curve.phi1[k] =
          hk.sign == 0 ? 0.0
                       : hk.sign * std::exp(hk.log_magnitude - curve.log_z[k]);
      curve.guard_events.push_back(k);
    } else {
      curve.phi1[k] = curve.h[k] / one_plus;
    }
  }
  curve.finalize();
  return curve;
}

}  // namespace

DevianceCurve deviance_curve(const PriorEnsemble& ens, const TemperingGrid& grid) {
  auto h_eval = [&ens](double alpha) { return tractile_h_log(ens, alpha); };
  auto direct_log_z = [&ens](double alpha) {
    std::vector<double> lt(ens.size());
    for (std::size_t i = 0; i < ens.size(); ++i) lt[i] = alpha * ens.log_liks[i];
    return log_sum_exp(lt) - std::log(static_cast<double>(ens.size()));
  };
  return build_curve(h_eval, grid, direct_log_z);
}

DevianceCurve deviance_curve_from_tractile(const std::function<double(double)>& h,
                                           const TemperingGrid& grid) {
  auto h_eval = [&h](double alpha) { return SignedLogValue::from_value(h(alpha)); };
  return build_curve(h_eval, grid, nullptr);
}

double expected_deviance(const DevianceCurve& curve, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("expected_deviance: alpha must be in [0, 1]");
  }
  const auto& pts = curve.grid.points;
  auto it = std::lower_bound(pts.begin(), pts.end(), alpha);
  if (it != pts.end() && *it == alpha) {
    return curve.phi1[static_cast<std::size_t>(it - pts.begin())];
  }
  return curve.phi1_at(alpha);
}

double mgf(const PriorEnsemble& ens, const DevianceCurve& curve, double alpha,
           double beta) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("mgf: alpha must be in [0, 1]");
  }
  if (beta < 0.0) throw std::invalid_argument("mgf: beta must be >= 0");
  std::vector<double> lt(ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i) {
    lt[i] = (alpha + beta) * ens.log_liks[i];
  }
  const double log_ep =
      log_sum_exp(lt) - std::log(static_cast<double>(ens.size()));
  return std::exp(log_ep - curve.integral_phi1(alpha));
}

double mgf_from_tractile(const std::function<double(double)>& h,
                         const DevianceCurve& curve, double alpha, double beta) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("mgf_from_tractile: alpha must be in [0, 1]");
  }
  if (beta < 0.0) throw std::invalid_argument("mgf_from_tractile: beta must be >= 0");
  const double upper = alpha + beta;
  double z_ab = 1.0;
  if (upper > 0.0) {
    constexpr int kNodes = 4097;
    std::vector<double> vals(kNodes);
    const double step = upper / (kNodes - 1);
    for (int j = 0; j < kNodes; ++j) vals[static_cast<std::size_t>(j)] = h(j * step);
    z_ab += simpson_integrate(vals, step);
  }
  return z_ab * std::exp(-curve.integral_phi1(alpha));
}

double moment_phi_n(const PriorEnsemble& ens, double alpha, int n) {
  if (n < 0) throw std::invalid_argument("moment_phi_n: n must be >= 0");
  if (n == 0) return 1.0;
  std::vector<SignedLogValue> num(ens.size());
  std::vector<double> den(ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const double ll = ens.log_liks[i];
    den[i] = alpha * ll;
    if (ll == 0.0) {
      num[i] = SignedLogValue::zero();
    } else {
      const int sign = (ll < 0.0 && n % 2 == 1) ? -1 : 1;
      num[i] = SignedLogValue::from_log(sign, alpha * ll + n * std::log(std::abs(ll)));
    }
  }
  const SignedLogValue top = signed_lse_sum(num);
  const double log_bottom = log_sum_exp(den);
  if (top.sign == 0) return 0.0;
  return top.sign * std::exp(top.log_magnitude - log_bottom);
}

std::vector<double> bernoulli_residual(const DevianceCurve& curve) {
  const auto& pts = curve.grid.points;
  const std::size_t n = pts.size();
  if (n < 3) return {};
  std::vector<double> res(n - 2);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double h0 = pts[k] - pts[k - 1];
    const double h1 = pts[k + 1] - pts[k];
    auto central = [&](const std::vector<double>& f) {
      // three-point derivative, exact for quadratics on non-uniform grids
      return -h1 / (h0 * (h0 + h1)) * f[k - 1] + (h1 - h0) / (h0 * h1) * f[k] +
             h0 / (h1 * (h0 + h1)) * f[k + 1];
    };
    if (curve.h[k] == 0.0) {
      res[k - 1] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double dphi = central(curve.phi1);
    const double dh = central(curve.h);
    const double phi = curve.phi1[k];
    res[k - 1] = std::abs(dphi - (dh / curve.h[k]) * phi + phi * phi);
  }
  return res;
}

}  // namespace powerpost
