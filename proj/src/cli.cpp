#include "powerpost/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "powerpost/deviance.hpp"
#include "powerpost/errors.hpp"
#include "powerpost/examples.hpp"
#include "powerpost/io.hpp"
#include "powerpost/posterior.hpp"
#include "powerpost/spectral.hpp"

namespace powerpost {

namespace fs = std::filesystem;

namespace {

// substream layout under the master seed
constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kEnsembleStream = 1;
constexpr std::uint64_t kSamplingStream = 2;

const std::vector<double> kReportAlphas = {0.0, 0.25, 0.5, 0.75, 1.0};

struct CommonOpts {
  std::uint64_t seed = 0;
  std::uint64_t n_samples = 1000;
  int n_alpha = 10;
  int sub_quad = 11;
  double alpha = 1.0;
  std::uint64_t n_out = 1000;
  std::string grid_spec;
  std::string config_path;
  std::string out_dir = "./out";
};

struct GridSpec {
  std::vector<std::array<double, 2>> box;
  int resolution = 0;
};

GridSpec parse_grid_spec(const std::string& spec) {
  // "lo,hi:res" or "lo1,hi1,lo2,hi2:res"
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("--grid must look like lo,hi:res or lo1,hi1,lo2,hi2:res");
  }
  GridSpec out;
  out.resolution = std::stoi(spec.substr(colon + 1));
  std::vector<double> bounds;
  std::string body = spec.substr(0, colon);
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const auto comma = body.find(',', pos);
    const std::string tok =
        body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    bounds.push_back(std::stod(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (bounds.size() == 2) {
    out.box = {{bounds[0], bounds[1]}};
  } else if (bounds.size() == 4) {
    out.box = {{bounds[0], bounds[1]}, {bounds[2], bounds[3]}};
  } else {
    throw std::invalid_argument("--grid needs 2 or 4 bounds");
  }
  return out;
}

std::string alpha_tag(double alpha) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", alpha);
  return buf;
}

// One assembled inverse problem: model, data, prior, and grid defaults.
struct Problem {
  std::unique_ptr<LikelihoodModel> model;
  Dataset data;
  Prior prior;
  std::vector<std::array<double, 2>> default_box;
  int default_resolution = 256;
  std::vector<std::string> theta_names;
  RunConfig cfg;
  double ex1_y = 0.0;  // the scalar observation when example == 1
};

Problem make_problem(const RunConfig& cfg, std::uint64_t seed) {
  Problem p;
  p.cfg = cfg;
  RandomStream master(seed);
  RandomStream data_stream = master.substream(kDataStream);
  if (cfg.example == 1) {
    p.ex1_y = ex1_generate_data(cfg.ex1, data_stream);
    p.data = ex1_dataset(p.ex1_y);
    p.model = ex1_model(cfg.ex1);
    p.prior = ex1_prior(cfg.ex1);
    const auto post = ex1_conjugate_transition(cfg.ex1, p.ex1_y, 1.0);
    const double sp = std::sqrt(cfg.ex1.sigma_p2);
    const double s1 = std::sqrt(post.variance);
    const double lo = std::min(cfg.ex1.mu_p - 8.0 * sp, post.mean - 8.0 * s1);
    const double hi = std::max(cfg.ex1.mu_p + 8.0 * sp, post.mean + 8.0 * s1);
    p.default_box = {{lo, hi}};
    p.default_resolution = 512;
    p.theta_names = {"theta"};
  } else if (cfg.example == 2) {
    p.data = ex2_generate_data(cfg.ex2, cfg.ex2.x0_true, cfg.ex2.a_true, data_stream);
    p.model = std::make_unique<WaveSourceModel>(cfg.ex2);
    p.prior = ex2_prior(cfg.ex2);
    p.default_box = {{cfg.ex2.x0_lo, cfg.ex2.x0_hi}, {cfg.ex2.a_lo, cfg.ex2.a_hi}};
    p.default_resolution = 96;
    p.theta_names = {"x0", "a", "s"};
  } else {
    p.data = ex3_generate_data(cfg.ex3, data_stream);
    p.model = std::make_unique<DataKernelMixtureModel>(cfg.ex3.sigma2);
    p.prior = ex3_prior(cfg.ex3);
    p.default_box = {{cfg.ex3.box_lo[0], cfg.ex3.box_hi[0]},
                     {cfg.ex3.box_lo[1], cfg.ex3.box_hi[1]}};
    p.default_resolution = 200;
    p.theta_names = {"theta1", "theta2"};
  }
  return p;
}

PriorEnsemble make_ensemble(const Problem& p, const CommonOpts& opts,
                            bool store_outputs) {
  RandomStream master(opts.seed);
  return build_ensemble(p.prior, *p.model, p.data, opts.n_samples,
                        master.substream(kEnsembleStream), store_outputs);
}

// Mean dispersion of the tempered 3-D cloud; pins the (x0, a) slice fields.
double ex2_mean_dispersion(const PriorEnsemble& ens, double alpha) {
  const auto w = sir_weights(ens, alpha);
  double s = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) s += w[i] * ens.thetas[i][2];
  return s;
}

struct FieldRequest {
  std::vector<std::array<double, 2>> box;
  int resolution;
};

FieldRequest resolve_grid(const Problem& p, const CommonOpts& opts) {
  if (opts.grid_spec.empty()) return {p.default_box, p.default_resolution};
  const GridSpec spec = parse_grid_spec(opts.grid_spec);
  std::size_t want = p.cfg.example == 1 ? 1 : 2;
  if (spec.box.size() != want) {
    throw std::invalid_argument("--grid dimension does not match the example");
  }
  return {spec.box, spec.resolution};
}

// Builds the field for one alpha, handling the example-2 dispersion slice.
PowerPosteriorField build_field(const Problem& p, const PriorEnsemble& ens,
                                const DevianceCurve& curve, const FieldRequest& req,
                                double alpha, std::uint64_t* grid_evals) {
  if (p.cfg.example == 2) {
    const double s_bar = ex2_mean_dispersion(ens, alpha);
    WaveSourceSliceModel slice(p.cfg.ex2, s_bar);
    Prior prior2d = ex2_prior_2d(p.cfg.ex2);
    auto field = grid_density(slice, p.data, prior2d, curve, req.box,
                              req.resolution, alpha);
    if (grid_evals) *grid_evals += field.forward_evals;
    return field;
  }
  auto field =
      grid_density(*p.model, p.data, p.prior, curve, req.box, req.resolution, alpha);
  if (grid_evals) *grid_evals += field.forward_evals;
  return field;
}

class Timer {
public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  std::int64_t elapsed_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

RunManifest base_manifest(const std::string& command, const CommonOpts& opts) {
  RunManifest m;
  m.command = command;
  m.seed = opts.seed;
  m.n_samples = opts.n_samples;
  m.n_alpha = opts.n_alpha;
  m.sub_quad = opts.sub_quad;
  return m;
}

void write_dataset(const Problem& p, const fs::path& out, RunManifest& manifest) {
  if (p.cfg.example == 1) {
    write_ex1_dataset_csv(p.ex1_y, out / "dataset.csv");
  } else if (p.cfg.example == 2) {
    write_ex2_dataset_csv(p.data, p.cfg.ex2, out / "dataset.csv");
  } else {
    write_ex3_dataset_csv(p.data, out / "dataset.csv");
  }
  manifest.outputs.push_back("dataset.csv");
}

int cmd_deviance(const CommonOpts& opts, const RunConfig& cfg) {
  Timer timer;
  Problem p = make_problem(cfg, opts.seed);
  RunManifest manifest = base_manifest("deviance", opts);
  const fs::path out(opts.out_dir);
  fs::create_directories(out);

  const auto ens = make_ensemble(p, opts, false);
  manifest.forward_evals_ensemble = p.model->forward_evals();
  const auto curve = deviance_curve(ens, make_grid(opts.n_alpha, opts.sub_quad));
  write_deviance_csv(curve, out / "deviance.csv");
  manifest.outputs.push_back("deviance.csv");
  write_dataset(p, out, manifest);
  manifest.wall_ms = timer.elapsed_ms();
  write_run_manifest(manifest, out / "run.json");
  return 0;
}

int cmd_density(const CommonOpts& opts, const RunConfig& cfg) {
  Timer timer;
  Problem p = make_problem(cfg, opts.seed);
  RunManifest manifest = base_manifest("density", opts);
  const fs::path out(opts.out_dir);
  fs::create_directories(out);

  const auto ens = make_ensemble(p, opts, false);
  manifest.forward_evals_ensemble = p.model->forward_evals();
  const auto curve = deviance_curve(ens, make_grid(opts.n_alpha, opts.sub_quad));
  const auto req = resolve_grid(p, opts);
  const auto field =
      build_field(p, ens, curve, req, opts.alpha, &manifest.forward_evals_grid);
  write_field_csv(field, out / "density.csv");
  write_field_meta_json(field, out / "density_meta.json");
  manifest.outputs.push_back("density.csv");
  manifest.outputs.push_back("density_meta.json");
  manifest.wall_ms = timer.elapsed_ms();
  write_run_manifest(manifest, out / "run.json");
  return 0;
}

int cmd_sample(const CommonOpts& opts, const RunConfig& cfg) {
  Timer timer;
  Problem p = make_problem(cfg, opts.seed);
  RunManifest manifest = base_manifest("sample", opts);
  const fs::path out(opts.out_dir);
  fs::create_directories(out);

  const auto ens = make_ensemble(p, opts, false);
  manifest.forward_evals_ensemble = p.model->forward_evals();
  RandomStream master(opts.seed);
  const auto sir =
      sir_sample(ens, opts.alpha, opts.n_out, master.substream(kSamplingStream));
  if (sir.degeneracy_warning) {
    std::cerr << "warning: SIR effective sample size " << sir.ess << " < 10\n";
  }
  write_samples_csv(sir.samples, p.theta_names, out / "samples.csv");
  manifest.outputs.push_back("samples.csv");
  manifest.wall_ms = timer.elapsed_ms();
  write_run_manifest(manifest, out / "run.json");
  return 0;
}

int cmd_spectral(const CommonOpts& opts, const RunConfig& cfg) {
  Timer timer;
  if (cfg.example != 1) {
    throw std::invalid_argument(
        "spectral: the kernel-trace pathway needs a quadratic residual "
        "distance; only example 1 qualifies");
  }
  Problem p = make_problem(cfg, opts.seed);
  RunManifest manifest = base_manifest("spectral", opts);
  const fs::path out(opts.out_dir);
  fs::create_directories(out);

  const auto ens = make_ensemble(p, opts, true);
  manifest.forward_evals_ensemble = p.model->forward_evals();
  const auto traces = nystrom_traces(ens, *p.model, p.data);
  const Theta probe(p.theta_names.size(), 0.0);
  KernelTraceState state(p.model->dispersion(probe), p.model->log_normalizer(probe),
                         traces.l1, traces.l2, traces.l3);
  const auto grid = make_grid(opts.n_alpha, opts.sub_quad);
  const auto [l1, l2] = trace_ode_integrate(state, grid);
  std::vector<double> phi1_spec(grid.points.size());
  for (std::size_t k = 0; k < grid.points.size(); ++k) {
    phi1_spec[k] = spectral_deviance(state, grid.points[k]);
  }
  write_trace_csv(grid.points, l1, l2, phi1_spec, out / "spectral.csv");
  manifest.outputs.push_back("spectral.csv");
  manifest.wall_ms = timer.elapsed_ms();
  write_run_manifest(manifest, out / "run.json");
  return 0;
}

int cmd_mgf(const CommonOpts& opts, const RunConfig& cfg, bool alpha_given) {
  Timer timer;
  Problem p = make_problem(cfg, opts.seed);
  RunManifest manifest = base_manifest("mgf", opts);
  const fs::path out(opts.out_dir);
  fs::create_directories(out);

  const auto ens = make_ensemble(p, opts, false);
  manifest.forward_evals_ensemble = p.model->forward_evals();
  const auto curve = deviance_curve(ens, make_grid(opts.n_alpha, opts.sub_quad));

  std::ofstream csv(out / "mgf.csv");
  csv << "alpha,beta,m\n";
  const int n_nodes = 21;
  auto emit_row = [&](double a, double b) {
    csv << format_double(a) << ',' << format_double(b) << ','
        << format_double(mgf(ens, curve, a, b)) << '\n';
  };
  if (alpha_given) {
    for (int j = 0; j < n_nodes; ++j) emit_row(opts.alpha, j / double(n_nodes - 1));
  } else {
    for (int i = 0; i < n_nodes; ++i) {
      for (int j = 0; j < n_nodes; ++j) {
        emit_row(i / double(n_nodes - 1), j / double(n_nodes - 1));
      }
    }
  }
  csv.close();
  manifest.outputs.push_back("mgf.csv");
  manifest.wall_ms = timer.elapsed_ms();
  write_run_manifest(manifest, out / "run.json");
  return 0;
}

int cmd_example1(const CommonOpts& opts, const RunConfig& cfg) {
  Timer timer;
  RunConfig c = cfg;
  c.example = 1;
  Problem p = make_problem(c, opts.seed);
  RunManifest manifest = base_manifest("example1", opts);
  const fs::path out(opts.out_dir);
  fs::create_directories(out);

  const auto ens = make_ensemble(p, opts, false);
  manifest.forward_evals_ensemble = p.model->forward_evals();
  const auto curve = deviance_curve(ens, make_grid(opts.n_alpha, opts.sub_quad));
  write_deviance_csv(curve, out / "deviance.csv");
  manifest.outputs.push_back("deviance.csv");
  write_dataset(p, out, manifest);

  const auto req = resolve_grid(p, opts);
  for (double alpha : kReportAlphas) {
    const auto field =
        build_field(p, ens, curve, req, alpha, &manifest.forward_evals_grid);
    const std::string tag = alpha_tag(alpha);
    write_field_csv(field, out / ("density_alpha_" + tag + ".csv"));
    write_field_meta_json(field, out / ("density_alpha_" + tag + ".json"));
    manifest.outputs.push_back("density_alpha_" + tag + ".csv");
    manifest.outputs.push_back("density_alpha_" + tag + ".json");
  }
  manifest.wall_ms = timer.elapsed_ms();
  write_run_manifest(manifest, out / "run.json");
  return 0;
}

int cmd_example2(const CommonOpts& opts, const RunConfig& cfg) {
  Timer timer;
  RunConfig c = cfg;
  c.example = 2;
  Problem p = make_problem(c, opts.seed);
  RunManifest manifest = base_manifest("example2", opts);
  const fs::path out(opts.out_dir);
  fs::create_directories(out);

  const auto ens = make_ensemble(p, opts, false);
  manifest.forward_evals_ensemble = p.model->forward_evals();
  const auto curve = deviance_curve(ens, make_grid(opts.n_alpha, opts.sub_quad));
  write_deviance_csv(curve, out / "deviance.csv");
  manifest.outputs.push_back("deviance.csv");
  write_dataset(p, out, manifest);

  const auto req = resolve_grid(p, opts);
  std::ofstream summary(out / "posterior_summary.csv");
  summary << "alpha,mean_x0,mean_a,mean_s,ess\n";
  for (double alpha : kReportAlphas) {
    const auto w = sir_weights(ens, alpha);
    double mx = 0.0, ma = 0.0, ms = 0.0, ess = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
      mx += w[i] * ens.thetas[i][0];
      ma += w[i] * ens.thetas[i][1];
      ms += w[i] * ens.thetas[i][2];
      ess += w[i] * w[i];
    }
    summary << format_double(alpha) << ',' << format_double(mx) << ','
            << format_double(ma) << ',' << format_double(ms) << ','
            << format_double(1.0 / ess) << '\n';

    const auto field =
        build_field(p, ens, curve, req, alpha, &manifest.forward_evals_grid);
    const std::string tag = alpha_tag(alpha);
    write_density_csv(marginal(field, 0), out / ("marginal_x0_alpha_" + tag + ".csv"));
    write_density_csv(marginal(field, 1), out / ("marginal_a_alpha_" + tag + ".csv"));
    manifest.outputs.push_back("marginal_x0_alpha_" + tag + ".csv");
    manifest.outputs.push_back("marginal_a_alpha_" + tag + ".csv");
  }
  summary.close();
  manifest.outputs.push_back("posterior_summary.csv");

  RandomStream master(opts.seed);
  const auto sir =
      sir_sample(ens, 1.0, opts.n_out, master.substream(kSamplingStream));
  write_samples_csv(sir.samples, p.theta_names, out / "samples.csv");
  manifest.outputs.push_back("samples.csv");
  manifest.wall_ms = timer.elapsed_ms();
  write_run_manifest(manifest, out / "run.json");
  return 0;
}

int cmd_example3(const CommonOpts& opts, const RunConfig& cfg) {
  Timer timer;
  RunConfig c = cfg;
  c.example = 3;
  Problem p = make_problem(c, opts.seed);
  RunManifest manifest = base_manifest("example3", opts);
  const fs::path out(opts.out_dir);
  fs::create_directories(out);

  const auto ens = make_ensemble(p, opts, false);
  manifest.forward_evals_ensemble = p.model->forward_evals();
  const auto curve = deviance_curve(ens, make_grid(opts.n_alpha, opts.sub_quad));
  write_deviance_csv(curve, out / "deviance.csv");
  manifest.outputs.push_back("deviance.csv");
  write_dataset(p, out, manifest);

  const auto req = resolve_grid(p, opts);
  for (double alpha : kReportAlphas) {
    const auto field =
        build_field(p, ens, curve, req, alpha, &manifest.forward_evals_grid);
    const std::string tag = alpha_tag(alpha);
    write_field_csv(field, out / ("density_alpha_" + tag + ".csv"));
    write_field_meta_json(field, out / ("density_alpha_" + tag + ".json"));
    manifest.outputs.push_back("density_alpha_" + tag + ".csv");
    manifest.outputs.push_back("density_alpha_" + tag + ".json");
    if (alpha == 1.0) {
      const auto maxima = detect_local_maxima(field, 0.1);
      std::ofstream modes(out / "modes.csv");
      modes << "theta1,theta2,rel_density\n";
      for (const auto& m : maxima) {
        modes << format_double(m.location[0]) << ',' << format_double(m.location[1])
              << ',' << format_double(m.density) << '\n';
      }
      manifest.outputs.push_back("modes.csv");
    }
  }
  manifest.wall_ms = timer.elapsed_ms();
  write_run_manifest(manifest, out / "run.json");
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Likelihood-tempering continuation for Bayesian inverse problems"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string config_path;

  auto add_common = [&](CLI::App* sub, bool with_alpha) {
    sub->add_option("--seed", opts.seed, "master RNG seed");
    sub->add_option("--n-samples", opts.n_samples, "prior ensemble size N")
        ->check(CLI::PositiveNumber);
    sub->add_option("--n-alpha", opts.n_alpha, "tempering intervals");
    sub->add_option("--sub-quad", opts.sub_quad, "Simpson nodes per interval (odd)");
    sub->add_option("--config", config_path, "JSON config overriding defaults");
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--grid", opts.grid_spec, "field lattice lo,hi:res or lo1,hi1,lo2,hi2:res");
    if (with_alpha) {
      sub->add_option("--alpha", opts.alpha, "tempering point")
          ->check(CLI::Range(0.0, 1.0));
      sub->add_option("--n-out", opts.n_out, "output sample count")
          ->check(CLI::PositiveNumber);
    }
  };

  auto* c_dev = app.add_subcommand("deviance", "expected-deviance curve from prior samples");
  add_common(c_dev, false);
  auto* c_den = app.add_subcommand("density", "transition density field at --alpha");
  add_common(c_den, true);
  auto* c_sam = app.add_subcommand("sample", "SIR draws from the transition at --alpha");
  add_common(c_sam, true);
  auto* c_spe = app.add_subcommand("spectral", "kernel-trace diagnostics");
  add_common(c_spe, false);
  auto* c_mgf = app.add_subcommand("mgf", "moment generating function surface");
  add_common(c_mgf, true);
  auto* c_e1 = app.add_subcommand("example1", "linear-Gaussian case study");
  add_common(c_e1, false);
  auto* c_e2 = app.add_subcommand("example2", "wave-source inversion case study");
  add_common(c_e2, false);
  auto* c_e3 = app.add_subcommand("example3", "bivariate multimodal case study");
  add_common(c_e3, false);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("powerpost");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n' << app.help();
    return 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_run_config(config_path);
    if (c_dev->parsed()) return cmd_deviance(opts, cfg);
    if (c_den->parsed()) return cmd_density(opts, cfg);
    if (c_sam->parsed()) return cmd_sample(opts, cfg);
    if (c_spe->parsed()) return cmd_spectral(opts, cfg);
    if (c_mgf->parsed()) return cmd_mgf(opts, cfg, c_mgf->count("--alpha") > 0);
    if (c_e1->parsed()) return cmd_example1(opts, cfg);
    if (c_e2->parsed()) return cmd_example2(opts, cfg);
    if (c_e3->parsed()) return cmd_example3(opts, cfg);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace powerpost
