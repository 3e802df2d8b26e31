#include "lendopt/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace lendopt {

void require_keys(const Json& j, const std::string& where,
                  const std::vector<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

namespace {

double need_number(const Json& j, const std::string& where, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number())
    throw ConfigError(where + ": missing numeric '" + key + "'");
  return j[key].get<double>();
}

}  // namespace

IncomeDistribution parse_distribution(const Json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError("distribution: missing 'kind'");
  std::string kind = j["kind"].get<std::string>();
  try {
    if (kind == "uniform") {
      require_keys(j, "distribution", {"kind"});
      return IncomeDistribution::uniform();
    }
    if (kind == "beta") {
      require_keys(j, "distribution", {"kind", "a", "b"});
      return IncomeDistribution::beta(need_number(j, "distribution", "a"),
                                      need_number(j, "distribution", "b"));
    }
    if (kind == "gamma") {
      require_keys(j, "distribution", {"kind", "shape", "scale"});
      return IncomeDistribution::gamma(need_number(j, "distribution", "shape"),
                                       need_number(j, "distribution", "scale"));
    }
    if (kind == "weibull") {
      require_keys(j, "distribution", {"kind", "k", "lambda"});
      return IncomeDistribution::weibull(need_number(j, "distribution", "k"),
                                         need_number(j, "distribution", "lambda"));
    }
    if (kind == "two_point") {
      require_keys(j, "distribution", {"kind", "center", "spread"});
      return IncomeDistribution::two_point(need_number(j, "distribution", "center"),
                                           need_number(j, "distribution", "spread"));
    }
    if (kind == "empirical") {
      require_keys(j, "distribution", {"kind", "x", "cdf"});
      return IncomeDistribution::empirical(j["x"].get<std::vector<double>>(),
                                           j["cdf"].get<std::vector<double>>());
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("distribution: ") + e.what());
  }
  throw ConfigError("distribution: unknown kind '" + kind + "'");
}

DemandFunction parse_demand(const Json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("demand: missing 'kind'");
  std::string kind = j["kind"].get<std::string>();
  try {
    if (kind == "constant_elasticity") {
      require_keys(j, "demand", {"kind", "alpha"});
      return DemandFunction::constant_elasticity(need_number(j, "demand", "alpha"));
    }
    if (kind == "table") {
      require_keys(j, "demand", {"kind", "points"});
      std::vector<std::pair<double, double>> pts;
      for (const auto& p : j["points"]) {
        if (!p.is_array() || p.size() != 2)
          throw ConfigError("demand: points must be [d, s] pairs");
        pts.emplace_back(p[0].get<double>(), p[1].get<double>());
      }
      return DemandFunction::tabulated(std::move(pts));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("demand: ") + e.what());
  }
  throw ConfigError("demand: unknown kind '" + kind + "'");
}

IncomeDistribution parse_distribution_flag(const std::string& text) {
  auto colon = text.find(':');
  std::string kind = text.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) args.push_back(std::stod(tok));
  }
  try {
    if (kind == "uniform" && args.empty()) return IncomeDistribution::uniform();
    if (kind == "beta" && args.size() == 2) return IncomeDistribution::beta(args[0], args[1]);
    if (kind == "gamma" && args.size() == 2)
      return IncomeDistribution::gamma(args[0], args[1]);
    if (kind == "weibull" && args.size() == 2)
      return IncomeDistribution::weibull(args[0], args[1]);
    if (kind == "two_point" && args.size() == 2)
      return IncomeDistribution::two_point(args[0], args[1]);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("--dist: ") + e.what());
  }
  throw ConfigError("--dist: cannot parse '" + text + "'");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << text;
  }
  fs::rename(tmp, target);
}

void write_csv_atomic(const std::string& path, const CsvTable& table) {
  std::ostringstream out;
  for (size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    out << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_double(row[i]);
    }
    out << '\n';
  }
  write_text_atomic(path, out.str());
}

void write_json_atomic(const std::string& path, const Json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    if (first) {
      while (std::getline(ss, tok, ',')) table.header.push_back(tok);
      first = false;
    } else {
      std::vector<double> row;
      while (std::getline(ss, tok, ',')) row.push_back(std::strtod(tok.c_str(), nullptr));
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_json(j);
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  require_keys(j, "config",
               {"model", "distribution", "demand", "solver", "simulation", "sweep",
                "output"});
  ExperimentConfig cfg;
  if (j.contains("model")) {
    require_keys(j["model"], "model", {"kind", "rho", "d", "alpha", "x0"});
    cfg.model = j["model"];
  }
  if (j.contains("distribution")) cfg.distribution = j["distribution"];
  if (j.contains("demand")) cfg.demand = j["demand"];
  if (j.contains("solver")) {
    const Json& s = j["solver"];
    require_keys(s, "solver", {"grid", "tol", "max_iterations"});
    if (s.contains("grid")) cfg.solver.grid = s["grid"].get<int>();
    if (s.contains("tol")) cfg.solver.tol = s["tol"].get<double>();
    if (s.contains("max_iterations"))
      cfg.solver.max_iterations = s["max_iterations"].get<int>();
  }
  if (j.contains("simulation")) {
    const Json& s = j["simulation"];
    require_keys(s, "simulation", {"paths", "seed", "horizon", "antithetic"});
    if (s.contains("paths")) cfg.simulation.paths = s["paths"].get<long long>();
    if (s.contains("seed")) cfg.simulation.seed = s["seed"].get<uint64_t>();
    if (s.contains("horizon")) cfg.simulation.horizon = s["horizon"].get<int>();
    if (s.contains("antithetic")) cfg.simulation.antithetic = s["antithetic"].get<bool>();
  }
  if (j.contains("sweep")) {
    const Json& s = j["sweep"];
    require_keys(s, "sweep", {"a_min", "a_max", "points", "alphas"});
    if (s.contains("a_min")) cfg.sweep.a_min = s["a_min"].get<double>();
    if (s.contains("a_max")) cfg.sweep.a_max = s["a_max"].get<double>();
    if (s.contains("points")) cfg.sweep.points = s["points"].get<int>();
    if (s.contains("alphas")) cfg.sweep.alphas = s["alphas"].get<std::vector<double>>();
  }
  if (j.contains("output")) {
    const Json& s = j["output"];
    require_keys(s, "output", {"directory", "format"});
    if (s.contains("directory")) cfg.output_dir = s["directory"].get<std::string>();
    if (s.contains("format")) cfg.format = s["format"].get<std::string>();
    if (cfg.format != "csv" && cfg.format != "json")
      throw ConfigError("output.format: must be csv or json");
  }
  return cfg;
}

}  // namespace lendopt
