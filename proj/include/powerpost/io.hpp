#ifndef POWERPOST_IO_HPP
#define POWERPOST_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "powerpost/deviance.hpp"
#include "powerpost/examples.hpp"
#include "powerpost/posterior.hpp"

namespace powerpost {

inline constexpr const char* kVersion = "0.1.0";

// shortest 17-significant-digit decimal form; round-trips any double
std::string format_double(double x);

// header `alpha,h,hbar,phi1,log_z`, one row per gridpoint
void write_deviance_csv(const DevianceCurve& curve, const std::filesystem::path& path);

// header `alpha,L1,L2,phi1_spectral`
void write_trace_csv(const std::vector<double>& alphas, const std::vector<double>& l1,
                     const std::vector<double>& l2,
                     const std::vector<double>& phi1_spectral,
                     const std::filesystem::path& path);

// header `theta1[,theta2],log_density,density`, row-major over the lattice
void write_field_csv(const PowerPosteriorField& field, const std::filesystem::path& path);

// box, resolution, alpha, normalization integral, forward-eval count, warning
void write_field_meta_json(const PowerPosteriorField& field,
                           const std::filesystem::path& path);

// header `theta1[,theta2[,theta3]]`, one sample per row
void write_samples_csv(const std::vector<Theta>& samples,
                       const std::vector<std::string>& names,
                       const std::filesystem::path& path);

// 1-D gridded density as `x,density`
void write_density_csv(const GriddedDensity& density, const std::filesystem::path& path);

// dataset serializations: `y` / `receiver,t,y` / `y1,y2`
void write_ex1_dataset_csv(double y, const std::filesystem::path& path);
void write_ex2_dataset_csv(const Dataset& data, const Example2Config& cfg,
                           const std::filesystem::path& path);
void write_ex3_dataset_csv(const Dataset& data, const std::filesystem::path& path);

// audit record for one CLI run
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::uint64_t n_samples = 0;
  int n_alpha = 0;
  int sub_quad = 0;
  std::uint64_t forward_evals_ensemble = 0;
  std::uint64_t forward_evals_grid = 0;
  std::int64_t wall_ms = 0;
  std::vector<std::string> outputs;
};

void write_run_manifest(const RunManifest& manifest, const std::filesystem::path& path);

// CLI configuration: which example drives the generic pipelines plus the
// per-example parameter blocks. Missing JSON keys keep their defaults.
struct RunConfig {
  int example = 1;
  Example1Config ex1;
  Example2Config ex2;
  Example3Config ex3;
};

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace powerpost

#endif
