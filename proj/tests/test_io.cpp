#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "powerpost/deviance.hpp"
#include "powerpost/examples.hpp"
#include "powerpost/io.hpp"

using namespace powerpost;
namespace fs = std::filesystem;

namespace {

std::vector<std::vector<double>> read_csv_doubles(const fs::path& path,
                                                  std::string* header = nullptr) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

TEST_CASE("format_double round-trips arbitrary doubles") {
  RandomStream rs(77);
  for (int i = 0; i < 2000; ++i) {
    const double x = (rs.uniform01() - 0.5) * std::exp(rs.uniform(-300.0, 300.0));
    const std::string s = format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
  CHECK(std::strtod(format_double(0.1).c_str(), nullptr) == 0.1);
}

TEST_CASE("deviance CSV round-trips bit-exactly") {
  Example1Config cfg;
  const double y = 101.0;
  auto model = ex1_model(cfg);
  const auto data = ex1_dataset(y);
  const auto prior = ex1_prior(cfg);
  const auto ens = build_ensemble(prior, *model, data, 200, RandomStream(8));
  const auto curve = deviance_curve(ens, make_grid(10, 11));

  const fs::path path = fs::temp_directory_path() / "powerpost_io_deviance.csv";
  write_deviance_csv(curve, path);
  std::string header;
  const auto rows = read_csv_doubles(path, &header);
  CHECK(header == "alpha,h,hbar,phi1,log_z");
  REQUIRE(rows.size() == curve.grid.points.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    REQUIRE(rows[k].size() == 5);
    CHECK(rows[k][0] == curve.grid.points[k]);
    CHECK(rows[k][1] == curve.h[k]);
    CHECK(rows[k][2] == curve.hbar[k]);
    CHECK(rows[k][3] == curve.phi1[k]);
    CHECK(rows[k][4] == curve.log_z[k]);
  }
  fs::remove(path);
}

TEST_CASE("field CSV layout is row-major with matching density column") {
  PowerPosteriorField field;
  field.box = {{0.0, 1.0}, {10.0, 12.0}};
  field.resolution = 17;
  field.alpha = 0.5;
  field.cell_measure = (1.0 / 16) * (2.0 / 16);
  field.log_density.resize(17 * 17);
  for (std::size_t i = 0; i < field.log_density.size(); ++i) {
    field.log_density[i] = -static_cast<double>(i) * 0.01;
  }
  const fs::path path = fs::temp_directory_path() / "powerpost_io_field.csv";
  write_field_csv(field, path);
  std::string header;
  const auto rows = read_csv_doubles(path, &header);
  CHECK(header == "theta1,theta2,log_density,density");
  REQUIRE(rows.size() == 17 * 17);
  const auto n0 = field.axis_nodes(0);
  const auto n1 = field.axis_nodes(1);
  for (std::size_t i = 0; i < 17; ++i) {
    for (std::size_t j = 0; j < 17; ++j) {
      const auto& row = rows[i * 17 + j];
      CHECK(row[0] == n0[i]);
      CHECK(row[1] == n1[j]);
      CHECK(row[2] == field.log_density[i * 17 + j]);
      CHECK(row[3] == std::exp(field.log_density[i * 17 + j]));
    }
  }
  fs::remove(path);
}

TEST_CASE("run config JSON overrides defaults and validates") {
  const fs::path path = fs::temp_directory_path() / "powerpost_io_cfg.json";
  std::ofstream(path) << R"({
    "example": 3,
    "example1": {"a": 7.0, "sigma_eps2": 1.5},
    "example3": {"twenty_mode": true, "n_data": 42, "sigma2": 0.04}
  })";
  const auto cfg = load_run_config(path);
  CHECK(cfg.example == 3);
  CHECK(cfg.ex1.a == 7.0);
  CHECK(cfg.ex1.sigma_eps2 == 1.5);
  CHECK(cfg.ex1.sigma_p2 == 0.01);  // untouched default
  CHECK(cfg.ex3.modes.size() == 20);
  CHECK(cfg.ex3.n_data == 42);
  CHECK(cfg.ex3.sigma2 == 0.04);

  std::ofstream(path) << R"({"example": 9})";
  CHECK_THROWS_AS(load_run_config(path), std::invalid_argument);
  std::ofstream(path) << R"({"example1": {"sigma_p2": -1.0}})";
  CHECK_THROWS_AS(load_run_config(path), std::invalid_argument);
  fs::remove(path);
}
