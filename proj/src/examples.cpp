#include "powerpost/examples.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "powerpost/errors.hpp"
#include "powerpost/numerics.hpp"

namespace powerpost {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

// ---------------------------------------------------------------------------
// Example 1

double ex1_analytic_deviance(const Example1Config& cfg, double y, double alpha) {
  const double v = cfg.a * cfg.a * cfg.sigma_p2;
  const double s_alpha2 = v * alpha + cfg.sigma_eps2;
  const double m = y - cfg.a * cfg.mu_p;
  return -0.5 * (std::log(kTwoPi * cfg.sigma_eps2) + v / s_alpha2 +
                 m * m * cfg.sigma_eps2 / (s_alpha2 * s_alpha2));
}

double ex1_analytic_evidence(const Example1Config& cfg, double y, double alpha) {
  const double v = cfg.a * cfg.a * cfg.sigma_p2;
  const double s_alpha2 = v * alpha + cfg.sigma_eps2;
  const double m = y - cfg.a * cfg.mu_p;
  return std::pow(kTwoPi * cfg.sigma_eps2, -0.5 * alpha) *
         std::sqrt(cfg.sigma_eps2 / s_alpha2) *
         std::exp(-0.5 * alpha * m * m / s_alpha2);
}

double ex1_analytic_tractile(const Example1Config& cfg, double y, double alpha) {
  return ex1_analytic_evidence(cfg, y, alpha) * ex1_analytic_deviance(cfg, y, alpha);
}

GaussianMoments ex1_conjugate_transition(const Example1Config& cfg, double y,
                                         double alpha) {
  const double precision = 1.0 / cfg.sigma_p2 + alpha * cfg.a * cfg.a / cfg.sigma_eps2;
  const double variance = 1.0 / precision;
  const double mean =
      variance * (cfg.mu_p / cfg.sigma_p2 + alpha * cfg.a * y / cfg.sigma_eps2);
  return {mean, variance};
}

double ex1_generate_data(const Example1Config& cfg, RandomStream& stream) {
  return cfg.a * cfg.theta_t + stream.normal(0.0, std::sqrt(cfg.sigma_eps2));
}

Dataset ex1_dataset(double y) {
  Dataset d;
  d.values = {{y}};
  return d;
}

Prior ex1_prior(const Example1Config& cfg) {
  const double mu = cfg.mu_p;
  const double var = cfg.sigma_p2;
  const double log_norm = -0.5 * std::log(kTwoPi * var);
  Prior p;
  p.log_pdf = [mu, var, log_norm](const Theta& theta) {
    const double d = theta[0] - mu;
    return log_norm - 0.5 * d * d / var;
  };
  p.sample = [mu, var](RandomStream& rs) {
    return Theta{rs.normal(mu, std::sqrt(var))};
  };
  return p;
}

std::unique_ptr<GaussianLinearModel> ex1_model(const Example1Config& cfg) {
  return std::make_unique<GaussianLinearModel>(cfg.a, cfg.sigma_eps2);
}

// ---------------------------------------------------------------------------
// Example 2

double ex2_initial_pulse(double x, double x0, double a) {
  const double l = x - x0 - 0.5;
  const double c = x - x0;
  const double r = x - x0 + 0.5;
  return a * (std::exp(-100.0 * l * l) + std::exp(-100.0 * c * c) +
              std::exp(-100.0 * r * r));
}

double ex2_forward(double t, double x, double x0, double a) {
  return 0.5 * ex2_initial_pulse(x - t, x0, a) + 0.5 * ex2_initial_pulse(x + t, x0, a);
}

Dataset ex2_generate_data(const Example2Config& cfg, double x0, double a,
                          const RandomStream& stream) {
  if (cfg.n_t < 2) throw std::invalid_argument("ex2_generate_data: need N_T >= 2");
  Dataset data;
  data.dt = cfg.t_end / (cfg.n_t - 1);
  data.values.resize(cfg.receivers.size());
  for (std::size_t r = 0; r < cfg.receivers.size(); ++r) {
    auto& signal = data.values[r];
    signal.resize(static_cast<std::size_t>(cfg.n_t));
    for (int k = 0; k < cfg.n_t; ++k) {
      // one substream per (receiver, time) cell; gamma rejection stays local
      RandomStream cell = stream.substream(r * static_cast<std::size_t>(cfg.n_t) +
                                           static_cast<std::size_t>(k));
      const double g = ex2_forward(k * data.dt, cfg.receivers[r], x0, a);
      const double speckle =
          cfg.speckle_shape > 0.0 ? cell.gamma(cfg.speckle_shape, cfg.speckle_scale)
                                  : 1.0;
      const double additive = cell.uniform(cfg.additive_lo, cfg.additive_hi);
      signal[static_cast<std::size_t>(k)] = speckle * g + additive;
    }
  }
  return data;
}

WaveSourceModel::WaveSourceModel(Example2Config cfg) : cfg_(std::move(cfg)) {
  if (cfg_.n_t < 2) throw std::invalid_argument("WaveSourceModel: need N_T >= 2");
  times_.resize(static_cast<std::size_t>(cfg_.n_t));
  const double dt = cfg_.t_end / (cfg_.n_t - 1);
  for (int k = 0; k < cfg_.n_t; ++k) times_[static_cast<std::size_t>(k)] = k * dt;
}

bool WaveSourceModel::in_domain(const Theta& theta) const {
  return theta.size() == 3 && theta[2] > 0.0;
}

double WaveSourceModel::log_normalizer(const Theta& theta) const {
  return static_cast<double>(cfg_.n_t) * std::log(theta[2]);
}

std::vector<std::vector<double>> WaveSourceModel::forward(const Theta& theta) const {
  std::vector<std::vector<double>> out(cfg_.receivers.size());
  for (std::size_t r = 0; r < cfg_.receivers.size(); ++r) {
    auto& signal = out[r];
    signal.resize(times_.size());
    for (std::size_t k = 0; k < times_.size(); ++k) {
      signal[k] = ex2_forward(times_[k], cfg_.receivers[r], theta[0], theta[1]);
    }
  }
  return out;
}

double WaveSourceModel::distance(const Dataset& data,
                                 const std::vector<std::vector<double>>& outputs) const {
  if (outputs.size() != data.values.size()) {
    throw std::invalid_argument("WaveSourceModel: receiver count mismatch");
  }
  double acc = 0.0;
  for (std::size_t r = 0; r < data.values.size(); ++r) {
    acc += wasserstein2_1d(data.values[r], outputs[r], data.dt);
  }
  return acc;
}

Prior ex2_prior(const Example2Config& cfg) {
  const double log_box =
      -std::log((cfg.x0_hi - cfg.x0_lo) * (cfg.a_hi - cfg.a_lo));
  Prior p;
  p.log_pdf = [cfg, log_box](const Theta& theta) {
    if (theta.size() < 3 || theta[0] < cfg.x0_lo || theta[0] > cfg.x0_hi ||
        theta[1] < cfg.a_lo || theta[1] > cfg.a_hi || theta[2] <= 0.0) {
      return -kInf;
    }
    // Gamma(shape, scale) log-density for the dispersion coordinate
    const double s = theta[2];
    const double shape = cfg.s_shape, scale = cfg.s_scale;
    return log_box + (shape - 1.0) * std::log(s) - s / scale -
           std::lgamma(shape) - shape * std::log(scale);
  };
  p.sample = [cfg](RandomStream& rs) {
    Theta t(3);
    t[0] = rs.uniform(cfg.x0_lo, cfg.x0_hi);
    t[1] = rs.uniform(cfg.a_lo, cfg.a_hi);
    t[2] = rs.gamma(cfg.s_shape, cfg.s_scale);
    return t;
  };
  return p;
}

WaveSourceSliceModel::WaveSourceSliceModel(Example2Config cfg, double s_fixed)
    : inner_(std::move(cfg)), s_fixed_(s_fixed) {
  if (!(s_fixed > 0.0)) {
    throw std::invalid_argument("WaveSourceSliceModel: dispersion must be > 0");
  }
}

double WaveSourceSliceModel::log_normalizer(const Theta&) const {
  return static_cast<double>(inner_.config().n_t) * std::log(s_fixed_);
}

std::vector<std::vector<double>> WaveSourceSliceModel::forward(const Theta& theta) const {
  return inner_.forward_outputs(Theta{theta[0], theta[1], s_fixed_});
}

double WaveSourceSliceModel::distance(const Dataset& data,
                                      const std::vector<std::vector<double>>& outputs) const {
  return inner_.distance(data, outputs);
}

Prior ex2_prior_2d(const Example2Config& cfg) {
  const double log_box = -std::log((cfg.x0_hi - cfg.x0_lo) * (cfg.a_hi - cfg.a_lo));
  Prior p;
  p.log_pdf = [cfg, log_box](const Theta& theta) {
    if (theta[0] < cfg.x0_lo || theta[0] > cfg.x0_hi || theta[1] < cfg.a_lo ||
        theta[1] > cfg.a_hi) {
      return -kInf;
    }
    return log_box;
  };
  p.sample = [cfg](RandomStream& rs) {
    return Theta{rs.uniform(cfg.x0_lo, cfg.x0_hi), rs.uniform(cfg.a_lo, cfg.a_hi)};
  };
  return p;
}

// ---------------------------------------------------------------------------
// Example 3

Example3Config ex3_twenty_mode_config() {
  Example3Config cfg;
  cfg.modes = {{2.18, 5.76}, {8.67, 9.59}, {4.24, 8.48}, {8.41, 1.68},
               {3.93, 8.82}, {3.25, 3.47}, {1.70, 0.50}, {4.59, 5.60},
               {6.91, 5.81}, {6.87, 5.40}, {5.41, 2.65}, {2.70, 7.88},
               {4.98, 3.70}, {1.14, 2.39}, {8.33, 9.50}, {4.93, 1.50},
               {1.83, 0.09}, {2.26, 0.31}, {5.54, 6.86}, {1.69, 8.11}};
  cfg.weights.assign(20, 1.0 / 20.0);
  return cfg;
}

Dataset ex3_generate_data(const Example3Config& cfg, const RandomStream& stream) {
  if (cfg.n_data < 1) throw std::invalid_argument("ex3_generate_data: empty dataset");
  if (cfg.modes.size() != cfg.weights.size() || cfg.modes.empty()) {
    throw std::invalid_argument("ex3_generate_data: modes/weights mismatch");
  }
  const double sigma = std::sqrt(cfg.sigma2);
  Dataset data;
  data.values.resize(static_cast<std::size_t>(cfg.n_data));
  for (int i = 0; i < cfg.n_data; ++i) {
    RandomStream sub = stream.substream(static_cast<std::size_t>(i));
    const double u = sub.uniform01();
    std::size_t m = 0;
    double cum = 0.0;
    for (; m < cfg.weights.size(); ++m) {
      cum += cfg.weights[m];
      if (u < cum) break;
    }
    if (m >= cfg.modes.size()) m = cfg.modes.size() - 1;
    data.values[static_cast<std::size_t>(i)] = {
        cfg.modes[m][0] + sigma * sub.normal(),
        cfg.modes[m][1] + sigma * sub.normal()};
  }
  return data;
}

DataKernelMixtureModel::DataKernelMixtureModel(double sigma2) : sigma2_(sigma2) {
  if (!(sigma2 > 0.0)) {
    throw std::invalid_argument("DataKernelMixtureModel: sigma2 must be > 0");
  }
  log_c_ = -std::log(kTwoPi * sigma2);
}

std::vector<std::vector<double>> DataKernelMixtureModel::forward(const Theta& theta) const {
  return {theta};  // identity forward map: Y = theta + eps
}

double DataKernelMixtureModel::distance(const Dataset& data,
                                        const std::vector<std::vector<double>>& outputs) const {
  if (data.values.empty()) {
    throw std::invalid_argument("DataKernelMixtureModel: empty dataset");
  }
  const auto& theta = outputs[0];
  std::vector<double> lt(data.values.size());
  for (std::size_t i = 0; i < data.values.size(); ++i) {
    lt[i] = -0.5 * sq_euclidean(data.values[i], theta) / sigma2_;
  }
  // dis = log N - logsumexp(...) >= 0 since every term is <= 1
  return std::log(static_cast<double>(data.values.size())) - log_sum_exp(lt);
}

Prior ex3_prior(const Example3Config& cfg) {
  const std::array<double, 2> lo = cfg.box_lo, hi = cfg.box_hi;
  const double log_area = -std::log((hi[0] - lo[0]) * (hi[1] - lo[1]));
  Prior p;
  p.log_pdf = [lo, hi, log_area](const Theta& theta) {
    if (theta[0] < lo[0] || theta[0] > hi[0] || theta[1] < lo[1] || theta[1] > hi[1]) {
      return -kInf;
    }
    return log_area;
  };
  p.sample = [lo, hi](RandomStream& rs) {
    return Theta{rs.uniform(lo[0], hi[0]), rs.uniform(lo[1], hi[1])};
  };
  return p;
}

}  // namespace powerpost
