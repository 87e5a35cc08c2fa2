#include "powerpost/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace powerpost {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path.string());
  }
  return out;
}

void dump_json(const json& j, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_deviance_csv(const DevianceCurve& curve, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "alpha,h,hbar,phi1,log_z\n";
  for (std::size_t k = 0; k < curve.grid.points.size(); ++k) {
    out << format_double(curve.grid.points[k]) << ',' << format_double(curve.h[k])
        << ',' << format_double(curve.hbar[k]) << ',' << format_double(curve.phi1[k])
        << ',' << format_double(curve.log_z[k]) << '\n';
  }
}

void write_trace_csv(const std::vector<double>& alphas, const std::vector<double>& l1,
                     const std::vector<double>& l2,
                     const std::vector<double>& phi1_spectral,
                     const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "alpha,L1,L2,phi1_spectral\n";
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    out << format_double(alphas[k]) << ',' << format_double(l1[k]) << ','
        << format_double(l2[k]) << ',' << format_double(phi1_spectral[k]) << '\n';
  }
}

void write_field_csv(const PowerPosteriorField& field, const std::filesystem::path& path) {
  auto out = open_out(path);
  const int res = field.resolution;
  if (field.dim() == 1) {
    out << "theta1,log_density,density\n";
    const auto nodes = field.axis_nodes(0);
    for (int i = 0; i < res; ++i) {
      const double ld = field.log_density[static_cast<std::size_t>(i)];
      out << format_double(nodes[static_cast<std::size_t>(i)]) << ','
          << format_double(ld) << ',' << format_double(std::exp(ld)) << '\n';
    }
  } else {
    out << "theta1,theta2,log_density,density\n";
    const auto n0 = field.axis_nodes(0);
    const auto n1 = field.axis_nodes(1);
    for (int i = 0; i < res; ++i) {
      for (int j = 0; j < res; ++j) {
        const double ld = field.log_density[static_cast<std::size_t>(i) * res +
                                            static_cast<std::size_t>(j)];
        out << format_double(n0[static_cast<std::size_t>(i)]) << ','
            << format_double(n1[static_cast<std::size_t>(j)]) << ','
            << format_double(ld) << ',' << format_double(std::exp(ld)) << '\n';
      }
    }
  }
}

void write_field_meta_json(const PowerPosteriorField& field,
                           const std::filesystem::path& path) {
  json j;
  j["box"] = json::array();
  for (const auto& b : field.box) j["box"].push_back({b[0], b[1]});
  j["resolution"] = field.resolution;
  j["alpha"] = field.alpha;
  j["normalization_integral"] = field.normalization_integral;
  j["forward_evals_grid"] = field.forward_evals;
  j["coverage_warning"] = field.coverage_warning;
  dump_json(j, path);
}

void write_samples_csv(const std::vector<Theta>& samples,
                       const std::vector<std::string>& names,
                       const std::filesystem::path& path) {
  auto out = open_out(path);
  for (std::size_t c = 0; c < names.size(); ++c) {
    out << names[c] << (c + 1 < names.size() ? ',' : '\n');
  }
  for (const auto& s : samples) {
    for (std::size_t c = 0; c < s.size(); ++c) {
      out << format_double(s[c]) << (c + 1 < s.size() ? ',' : '\n');
    }
  }
}

void write_density_csv(const GriddedDensity& density, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "x,density\n";
  const auto nodes = density.axis_nodes(0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out << format_double(nodes[i]) << ',' << format_double(density.values[i]) << '\n';
  }
}

void write_ex1_dataset_csv(double y, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "y\n" << format_double(y) << '\n';
}

void write_ex2_dataset_csv(const Dataset& data, const Example2Config& cfg,
                           const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "receiver,t,y\n";
  for (std::size_t r = 0; r < data.values.size(); ++r) {
    for (std::size_t k = 0; k < data.values[r].size(); ++k) {
      out << format_double(cfg.receivers[r]) << ','
          << format_double(static_cast<double>(k) * data.dt) << ','
          << format_double(data.values[r][k]) << '\n';
    }
  }
}

void write_ex3_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "y1,y2\n";
  for (const auto& point : data.values) {
    out << format_double(point[0]) << ',' << format_double(point[1]) << '\n';
  }
}

void write_run_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  json j;
  j["command"] = manifest.command;
  j["seed"] = manifest.seed;
  j["n_samples"] = manifest.n_samples;
  j["n_alpha"] = manifest.n_alpha;
  j["sub_quad"] = manifest.sub_quad;
  j["forward_evals_ensemble"] = manifest.forward_evals_ensemble;
  j["forward_evals_grid"] = manifest.forward_evals_grid;
  j["wall_ms"] = manifest.wall_ms;
  j["outputs"] = manifest.outputs;
  j["version"] = kVersion;
  dump_json(j, path);
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config parse error: " + std::string(e.what()));
  }
  RunConfig cfg;
  maybe(j, "example", cfg.example);
  if (cfg.example < 1 || cfg.example > 3) {
    throw std::invalid_argument("config: example must be 1, 2 or 3");
  }
  if (j.contains("example1")) {
    const auto& e = j.at("example1");
    maybe(e, "a", cfg.ex1.a);
    maybe(e, "sigma_p2", cfg.ex1.sigma_p2);
    maybe(e, "sigma_eps2", cfg.ex1.sigma_eps2);
    maybe(e, "mu_p", cfg.ex1.mu_p);
    maybe(e, "theta_t", cfg.ex1.theta_t);
    if (!(cfg.ex1.sigma_p2 > 0.0) || !(cfg.ex1.sigma_eps2 > 0.0)) {
      throw std::invalid_argument("config: example1 variances must be > 0");
    }
  }
  if (j.contains("example2")) {
    const auto& e = j.at("example2");
    maybe(e, "receivers", cfg.ex2.receivers);
    maybe(e, "t_end", cfg.ex2.t_end);
    maybe(e, "n_t", cfg.ex2.n_t);
    maybe(e, "x0_true", cfg.ex2.x0_true);
    maybe(e, "a_true", cfg.ex2.a_true);
    maybe(e, "speckle_shape", cfg.ex2.speckle_shape);
    maybe(e, "speckle_scale", cfg.ex2.speckle_scale);
    maybe(e, "additive_lo", cfg.ex2.additive_lo);
    maybe(e, "additive_hi", cfg.ex2.additive_hi);
    maybe(e, "s_shape", cfg.ex2.s_shape);
    maybe(e, "s_scale", cfg.ex2.s_scale);
    maybe(e, "x0_lo", cfg.ex2.x0_lo);
    maybe(e, "x0_hi", cfg.ex2.x0_hi);
    maybe(e, "a_lo", cfg.ex2.a_lo);
    maybe(e, "a_hi", cfg.ex2.a_hi);
    if (cfg.ex2.n_t < 2) throw std::invalid_argument("config: example2 n_t must be >= 2");
  }
  if (j.contains("example3")) {
    const auto& e = j.at("example3");
    bool twenty = false;
    maybe(e, "twenty_mode", twenty);
    if (twenty) cfg.ex3 = ex3_twenty_mode_config();
    if (e.contains("modes")) {
      cfg.ex3.modes.clear();
      for (const auto& m : e.at("modes")) {
        cfg.ex3.modes.push_back({m.at(0).get<double>(), m.at(1).get<double>()});
      }
    }
    maybe(e, "weights", cfg.ex3.weights);
    maybe(e, "sigma2", cfg.ex3.sigma2);
    maybe(e, "n_data", cfg.ex3.n_data);
    if (e.contains("box_lo")) {
      cfg.ex3.box_lo = {e.at("box_lo").at(0).get<double>(),
                        e.at("box_lo").at(1).get<double>()};
    }
    if (e.contains("box_hi")) {
      cfg.ex3.box_hi = {e.at("box_hi").at(0).get<double>(),
                        e.at("box_hi").at(1).get<double>()};
    }
    if (cfg.ex3.modes.size() != cfg.ex3.weights.size()) {
      throw std::invalid_argument("config: example3 modes/weights mismatch");
    }
  }
  return cfg;
}

}  // namespace powerpost
