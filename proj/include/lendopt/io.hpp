#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "lendopt/demand.hpp"
#include "lendopt/distributions.hpp"

namespace lendopt {

using Json = nlohmann::ordered_json;

/// Raised on malformed configuration; the CLI maps it to exit code 1.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Rejects keys outside `allowed` (schema validation).
void require_keys(const Json& j, const std::string& where,
                  const std::vector<std::string>& allowed);

/// {kind:"uniform"} | {kind:"beta",a,b} | {kind:"gamma",shape,scale}
/// | {kind:"weibull",k,lambda} | {kind:"two_point",center,spread}
/// | {kind:"empirical",x:[...],cdf:[...]}
IncomeDistribution parse_distribution(const Json& j);

/// {kind:"constant_elasticity",alpha} | {kind:"table",points:[[d,s],...]}
DemandFunction parse_demand(const Json& j);

/// Same grammar in flag form: "uniform", "beta:2,2", "gamma:2,1",
/// "weibull:2,1", "two_point:0.5,0.25".
IncomeDistribution parse_distribution_flag(const std::string& text);

/// 17 significant digits; round-trips bit-exact through strtod.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Comma separated, header row, LF endings; written to a temp file and
/// renamed into place.
void write_csv_atomic(const std::string& path, const CsvTable& table);
void write_json_atomic(const std::string& path, const Json& j);
void write_text_atomic(const std::string& path, const std::string& text);
CsvTable read_csv(const std::string& path);

struct SolverSettings {
  int grid = 2000;
  double tol = 1e-9;
  int max_iterations = 100000;
};

struct SimulationSettings {
  long long paths = 100000;
  uint64_t seed = 20240901;
  int horizon = 2000;
  bool antithetic = false;
};

struct SweepSettings {
  double a_min = 0.02;
  double a_max = 12.0;
  int points = 60;
  std::vector<double> alphas = {0.3, 0.5, 0.9};
};

/// Full experiment configuration; every section is optional and unknown keys
/// anywhere are rejected.
struct ExperimentConfig {
  Json model;         // {kind:"exo"|"endo", rho, d, alpha, x0}
  Json distribution;  // parse_distribution input
  Json demand;        // parse_demand input
  SolverSettings solver;
  SimulationSettings simulation;
  SweepSettings sweep;
  std::string output_dir = ".";
  std::string format = "csv";

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_json(const Json& j);
};

}  // namespace lendopt
