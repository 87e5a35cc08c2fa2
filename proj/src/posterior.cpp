#include "powerpost/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "powerpost/errors.hpp"

namespace powerpost {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> nodes_for(const std::array<double, 2>& bounds, int resolution) {
  std::vector<double> out(static_cast<std::size_t>(resolution));
  const double step = (bounds[1] - bounds[0]) / (resolution - 1);
  for (int i = 0; i < resolution; ++i) {
    out[static_cast<std::size_t>(i)] = bounds[0] + i * step;
  }
  out.back() = bounds[1];
  return out;
}

double trap_weight(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

// trapezoid integral of node values over the lattice
double lattice_integral(const std::vector<double>& values,
                        const std::vector<std::array<double, 2>>& box,
                        int resolution, double cell_measure) {
  const std::size_t d = box.size();
  double acc = 0.0;
  if (d == 1) {
    for (int i = 0; i < resolution; ++i) {
      acc += trap_weight(i, resolution) * values[static_cast<std::size_t>(i)];
    }
  } else {
    for (int i = 0; i < resolution; ++i) {
      const double wi = trap_weight(i, resolution);
      for (int j = 0; j < resolution; ++j) {
        acc += wi * trap_weight(j, resolution) *
               values[static_cast<std::size_t>(i) * resolution +
                      static_cast<std::size_t>(j)];
      }
    }
  }
  return acc * cell_measure;
}

double spacing_of(const std::array<double, 2>& bounds, int resolution) {
  return (bounds[1] - bounds[0]) / (resolution - 1);
}

}  // namespace

std::vector<double> PowerPosteriorField::axis_nodes(std::size_t axis) const {
  return nodes_for(box.at(axis), resolution);
}

double PowerPosteriorField::spacing(std::size_t axis) const {
  return spacing_of(box.at(axis), resolution);
}

std::vector<double> GriddedDensity::axis_nodes(std::size_t axis) const {
  return nodes_for(box.at(axis), resolution);
}

GriddedDensity make_density(std::vector<std::array<double, 2>> box, int resolution,
                            std::vector<double> raw_values) {
  const std::size_t d = box.size();
  if (d < 1 || d > 2) throw std::invalid_argument("make_density: d must be 1 or 2");
  if (resolution < 2) throw std::invalid_argument("make_density: resolution too small");
  std::size_t expected = static_cast<std::size_t>(resolution);
  if (d == 2) expected *= static_cast<std::size_t>(resolution);
  if (raw_values.size() != expected) {
    throw std::invalid_argument("make_density: value count does not match lattice");
  }
  double cell = 1.0;
  for (const auto& b : box) cell *= spacing_of(b, resolution);
  for (double v : raw_values) {
    if (!(v >= 0.0)) throw std::invalid_argument("make_density: negative value");
  }
  const double total = lattice_integral(raw_values, box, resolution, cell);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw numeric_error("make_density: density integrates to zero");
  }
  for (double& v : raw_values) v /= total;
  return GriddedDensity{std::move(box), resolution, std::move(raw_values), cell};
}

double log_power_posterior(const LikelihoodModel& model, const Dataset& data,
                           const std::function<double(const Theta&)>& prior_log_pdf,
                           const DevianceCurve& curve, const Theta& theta,
                           double alpha) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("log_power_posterior: alpha must be in [0, 1]");
  }
  const double log_prior = prior_log_pdf(theta);
  if (log_prior == -kInf) return -kInf;
  double acc = log_prior;
  if (alpha > 0.0) {
    acc += alpha * model.log_likelihood(data, theta);
    acc -= curve.integral_phi1(alpha);
  }
  return acc;
}

PowerPosteriorField grid_density(const LikelihoodModel& model, const Dataset& data,
                                 const Prior& prior, const DevianceCurve& curve,
                                 const std::vector<std::array<double, 2>>& box,
                                 int resolution, double alpha) {
  const std::size_t d = box.size();
  if (d < 1 || d > 2) throw std::invalid_argument("grid_density: d must be 1 or 2");
  if (resolution < 16) {
    throw std::invalid_argument("grid_density: resolution must be >= 16 per dimension");
  }
  for (const auto& b : box) {
    if (!(b[1] > b[0])) throw std::invalid_argument("grid_density: empty box");
  }
  PowerPosteriorField field;
  field.box = box;
  field.resolution = resolution;
  field.alpha = alpha;
  field.cell_measure = 1.0;
  for (const auto& b : box) field.cell_measure *= spacing_of(b, resolution);

  const double iphi = alpha > 0.0 ? curve.integral_phi1(alpha) : 0.0;
  const std::uint64_t evals_before = model.forward_evals();

  const auto nodes0 = nodes_for(box[0], resolution);
  if (d == 1) {
    field.log_density.resize(nodes0.size());
    Theta theta(1);
    for (std::size_t i = 0; i < nodes0.size(); ++i) {
      theta[0] = nodes0[i];
      const double lp = prior.log_pdf(theta);
      double v = lp;
      if (lp != -kInf && alpha > 0.0) {
        v += alpha * model.log_likelihood(data, theta) - iphi;
      }
      field.log_density[i] = v;
    }
  } else {
    const auto nodes1 = nodes_for(box[1], resolution);
    field.log_density.resize(nodes0.size() * nodes1.size());
    Theta theta(2);
    for (std::size_t i = 0; i < nodes0.size(); ++i) {
      theta[0] = nodes0[i];
      for (std::size_t j = 0; j < nodes1.size(); ++j) {
        theta[1] = nodes1[j];
        const double lp = prior.log_pdf(theta);
        double v = lp;
        if (lp != -kInf && alpha > 0.0) {
          v += alpha * model.log_likelihood(data, theta) - iphi;
        }
        field.log_density[i * nodes1.size() + j] = v;
      }
    }
  }
  field.forward_evals = model.forward_evals() - evals_before;
  field.normalization_integral = normalization(field);

  // fixed-seed prior probe: box should hold at least 99.9% of the mass
  RandomStream probe(0x9E3779B97F4A7C15ULL);
  constexpr int kProbeDraws = 4096;
  int inside = 0;
  for (int k = 0; k < kProbeDraws; ++k) {
    RandomStream sub = probe.substream(static_cast<std::uint64_t>(k));
    const Theta draw = prior.sample(sub);
    bool in = true;
    for (std::size_t a = 0; a < d; ++a) {
      if (draw[a] < box[a][0] || draw[a] > box[a][1]) in = false;
    }
    inside += in ? 1 : 0;
  }
  field.coverage_warning = inside < static_cast<int>(0.999 * kProbeDraws);
  return field;
}

double normalization(const PowerPosteriorField& field) {
  std::vector<double> dens(field.log_density.size());
  for (std::size_t i = 0; i < dens.size(); ++i) {
    const double ld = field.log_density[i];
    dens[i] = ld == -kInf ? 0.0 : std::exp(ld);
  }
  return lattice_integral(dens, field.box, field.resolution, field.cell_measure);
}

std::vector<double> field_mean(const PowerPosteriorField& field) {
  const std::size_t d = field.dim();
  std::vector<double> mean(d, 0.0);
  double mass = 0.0;
  const int res = field.resolution;
  const auto nodes0 = field.axis_nodes(0);
  if (d == 1) {
    for (int i = 0; i < res; ++i) {
      const double w = trap_weight(i, res) *
                       std::exp(field.log_density[static_cast<std::size_t>(i)]);
      mass += w;
      mean[0] += w * nodes0[static_cast<std::size_t>(i)];
    }
  } else {
    const auto nodes1 = field.axis_nodes(1);
    for (int i = 0; i < res; ++i) {
      for (int j = 0; j < res; ++j) {
        const double w =
            trap_weight(i, res) * trap_weight(j, res) *
            std::exp(field.log_density[static_cast<std::size_t>(i) * res +
                                       static_cast<std::size_t>(j)]);
        mass += w;
        mean[0] += w * nodes0[static_cast<std::size_t>(i)];
        mean[1] += w * nodes1[static_cast<std::size_t>(j)];
      }
    }
  }
  if (!(mass > 0.0)) throw numeric_error("field_mean: zero-mass field");
  for (double& m : mean) m /= mass;
  return mean;
}

std::vector<double> field_variance(const PowerPosteriorField& field) {
  const auto mean = field_mean(field);
  const std::size_t d = field.dim();
  std::vector<double> var(d, 0.0);
  double mass = 0.0;
  const int res = field.resolution;
  const auto nodes0 = field.axis_nodes(0);
  if (d == 1) {
    for (int i = 0; i < res; ++i) {
      const double w = trap_weight(i, res) *
                       std::exp(field.log_density[static_cast<std::size_t>(i)]);
      const double dx = nodes0[static_cast<std::size_t>(i)] - mean[0];
      mass += w;
      var[0] += w * dx * dx;
    }
  } else {
    const auto nodes1 = field.axis_nodes(1);
    for (int i = 0; i < res; ++i) {
      for (int j = 0; j < res; ++j) {
        const double w =
            trap_weight(i, res) * trap_weight(j, res) *
            std::exp(field.log_density[static_cast<std::size_t>(i) * res +
                                       static_cast<std::size_t>(j)]);
        const double dx = nodes0[static_cast<std::size_t>(i)] - mean[0];
        const double dy = nodes1[static_cast<std::size_t>(j)] - mean[1];
        mass += w;
        var[0] += w * dx * dx;
        var[1] += w * dy * dy;
      }
    }
  }
  for (double& v : var) v /= mass;
  return var;
}

GriddedDensity marginal(const PowerPosteriorField& field, std::size_t keep_axis) {
  if (field.dim() != 2) {
    throw std::invalid_argument("marginal: field must be 2-D");
  }
  if (keep_axis > 1) throw std::invalid_argument("marginal: axis must be 0 or 1");
  const int res = field.resolution;
  const double other_step = field.spacing(1 - keep_axis);
  std::vector<double> values(static_cast<std::size_t>(res), 0.0);
  for (int k = 0; k < res; ++k) {
    double acc = 0.0;
    for (int o = 0; o < res; ++o) {
      const std::size_t idx = keep_axis == 0
                                  ? static_cast<std::size_t>(k) * res + o
                                  : static_cast<std::size_t>(o) * res + k;
      const double ld = field.log_density[idx];
      acc += trap_weight(o, res) * (ld == -kInf ? 0.0 : std::exp(ld));
    }
    values[static_cast<std::size_t>(k)] = acc * other_step;
  }
  return make_density({field.box[keep_axis]}, res, std::move(values));
}

std::vector<double> sir_weights(const PriorEnsemble& ens, double alpha) {
  const std::size_t n = ens.size();
  double max_lw = -kInf;
  for (std::size_t i = 0; i < n; ++i) max_lw = std::max(max_lw, alpha * ens.log_liks[i]);
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(alpha * ens.log_liks[i] - max_lw);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

SirResult sir_sample(const PriorEnsemble& ens, double alpha, std::size_t n_out,
                     RandomStream stream) {
  if (n_out < 1) throw std::invalid_argument("sir_sample: n_out must be >= 1");
  const auto w = sir_weights(ens, alpha);
  double sum_sq = 0.0;
  for (double x : w) sum_sq += x * x;
  SirResult out;
  out.ess = 1.0 / sum_sq;
  out.degeneracy_warning = out.ess < 10.0;
  out.samples.reserve(n_out);
  // systematic resampling over the fixed sample-index order
  const double u0 = stream.uniform01() / static_cast<double>(n_out);
  std::size_t i = 0;
  double cum = w[0];
  for (std::size_t j = 0; j < n_out; ++j) {
    const double target = u0 + static_cast<double>(j) / static_cast<double>(n_out);
    while (cum < target && i + 1 < w.size()) {
      ++i;
      cum += w[i];
    }
    out.samples.push_back(ens.thetas[i]);
  }
  return out;
}

namespace {

// inverse of a piecewise-linear CDF built from node values by trapezoid
class LatticeCdf {
public:
  LatticeCdf(const std::vector<double>& nodes, const std::vector<double>& density) {
    nodes_ = nodes;
    cdf_.assign(nodes.size(), 0.0);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      cdf_[i] = cdf_[i - 1] + 0.5 * (density[i - 1] + density[i]) *
                                  (nodes[i] - nodes[i - 1]);
    }
    total_ = cdf_.back();
  }
  double total() const { return total_; }
  double invert(double u) const {
    const double target = u * total_;
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
    if (k == 0) return nodes_.front();
    if (k >= cdf_.size()) return nodes_.back();
    const double seg = cdf_[k] - cdf_[k - 1];
    if (seg <= 0.0) return nodes_[k];
    const double frac = (target - cdf_[k - 1]) / seg;
    return nodes_[k - 1] + frac * (nodes_[k] - nodes_[k - 1]);
  }

private:
  std::vector<double> nodes_, cdf_;
  double total_ = 0.0;
};

}  // namespace

std::vector<Theta> grid_inverse_cdf_sample(const PowerPosteriorField& field,
                                           std::size_t n_out, RandomStream stream) {
  const std::size_t d = field.dim();
  const int res = field.resolution;
  std::vector<double> dens(field.log_density.size());
  for (std::size_t i = 0; i < dens.size(); ++i) {
    const double ld = field.log_density[i];
    dens[i] = ld == -kInf ? 0.0 : std::exp(ld);
  }
  std::vector<Theta> out;
  out.reserve(n_out);
  if (d == 1) {
    LatticeCdf cdf(field.axis_nodes(0), dens);
    if (!(cdf.total() > 0.0)) {
      throw numeric_error("grid_inverse_cdf_sample: field is unnormalizable");
    }
    for (std::size_t j = 0; j < n_out; ++j) {
      out.push_back({cdf.invert(stream.uniform01())});
    }
    return out;
  }
  // 2-D: axis-0 marginal, then the conditional slice at the sampled abscissa
  const auto nodes0 = field.axis_nodes(0);
  const auto nodes1 = field.axis_nodes(1);
  const double step1 = field.spacing(1);
  std::vector<double> marg(static_cast<std::size_t>(res), 0.0);
  for (int i = 0; i < res; ++i) {
    double acc = 0.0;
    for (int j = 0; j < res; ++j) {
      acc += trap_weight(j, res) * dens[static_cast<std::size_t>(i) * res +
                                        static_cast<std::size_t>(j)];
    }
    marg[static_cast<std::size_t>(i)] = acc * step1;
  }
  LatticeCdf cdf0(nodes0, marg);
  if (!(cdf0.total() > 0.0)) {
    throw numeric_error("grid_inverse_cdf_sample: field is unnormalizable");
  }
  const double step0 = field.spacing(0);
  std::vector<double> slice(static_cast<std::size_t>(res));
  for (std::size_t j = 0; j < n_out; ++j) {
    const double x = cdf0.invert(stream.uniform01());
    // linear blend of the two bracketing columns
    double pos = (x - nodes0.front()) / step0;
    int i0 = std::min(res - 2, std::max(0, static_cast<int>(pos)));
    double frac = std::min(1.0, std::max(0.0, pos - i0));
    for (int jj = 0; jj < res; ++jj) {
      const double lo = dens[static_cast<std::size_t>(i0) * res +
                             static_cast<std::size_t>(jj)];
      const double hi = dens[(static_cast<std::size_t>(i0) + 1) * res +
                             static_cast<std::size_t>(jj)];
      slice[static_cast<std::size_t>(jj)] = (1.0 - frac) * lo + frac * hi;
    }
    LatticeCdf cdf1(nodes1, slice);
    const double y = cdf1.total() > 0.0 ? cdf1.invert(stream.uniform01())
                                        : nodes1[static_cast<std::size_t>(res / 2)];
    out.push_back({x, y});
  }
  return out;
}

GriddedDensity perturb(const GriddedDensity& f, const GriddedDensity& g) {
  if (f.box != g.box || f.resolution != g.resolution) {
    throw std::invalid_argument("perturb: densities live on different grids");
  }
  std::vector<double> prod(f.values.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = f.values[i] * g.values[i];
  try {
    return make_density(f.box, f.resolution, std::move(prod));
  } catch (const numeric_error&) {
    throw numeric_error("perturb: product density is zero everywhere");
  }
}

GriddedDensity power(const GriddedDensity& f, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("power: exponent must be > 0");
  std::vector<double> vals(f.values.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    vals[i] = f.values[i] == 0.0 ? 0.0 : std::pow(f.values[i], r);
  }
  return make_density(f.box, f.resolution, std::move(vals));
}

GriddedDensity renormalize(const PowerPosteriorField& field) {
  std::vector<double> dens(field.log_density.size());
  double max_ld = -kInf;
  for (double ld : field.log_density) max_ld = std::max(max_ld, ld);
  if (max_ld == -kInf) throw numeric_error("renormalize: empty field");
  for (std::size_t i = 0; i < dens.size(); ++i) {
    const double ld = field.log_density[i];
    dens[i] = ld == -kInf ? 0.0 : std::exp(ld - max_ld);
  }
  return make_density(field.box, field.resolution, std::move(dens));
}

std::vector<LocalMaximum> detect_local_maxima(const PowerPosteriorField& field,
                                              double rel_threshold) {
  const int res = field.resolution;
  std::vector<LocalMaximum> found;
  double max_ld = -kInf;
  for (double ld : field.log_density) max_ld = std::max(max_ld, ld);
  if (max_ld == -kInf) return found;
  const double log_thresh = max_ld + std::log(rel_threshold);
  const auto nodes0 = field.axis_nodes(0);
  if (field.dim() == 1) {
    for (int i = 1; i + 1 < res; ++i) {
      const double v = field.log_density[static_cast<std::size_t>(i)];
      if (v < log_thresh) continue;
      if (v > field.log_density[static_cast<std::size_t>(i) - 1] &&
          v > field.log_density[static_cast<std::size_t>(i) + 1]) {
        found.push_back({{nodes0[static_cast<std::size_t>(i)]},
                         std::exp(v - max_ld)});
      }
    }
  } else {
    const auto nodes1 = field.axis_nodes(1);
    for (int i = 1; i + 1 < res; ++i) {
      for (int j = 1; j + 1 < res; ++j) {
        const double v = field.log_density[static_cast<std::size_t>(i) * res +
                                           static_cast<std::size_t>(j)];
        if (v < log_thresh) continue;
        bool peak = true;
        for (int di = -1; di <= 1 && peak; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            const double nb =
                field.log_density[static_cast<std::size_t>(i + di) * res +
                                  static_cast<std::size_t>(j + dj)];
            if (nb >= v) {
              peak = false;
              break;
            }
          }
        }
        if (peak) {
          found.push_back({{nodes0[static_cast<std::size_t>(i)],
                            nodes1[static_cast<std::size_t>(j)]},
                           std::exp(v - max_ld)});
        }
      }
    }
  }
  std::sort(found.begin(), found.end(),
            [](const LocalMaximum& a, const LocalMaximum& b) {
              return a.density > b.density;
            });
  return found;
}

}  // namespace powerpost
