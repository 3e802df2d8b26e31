#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "lendopt/analysis.hpp"
#include "lendopt/io.hpp"

using namespace lendopt;
namespace fs = std::filesystem;

static fs::path g_dir;

static int run_cli(const std::string& args) {
  std::string cmd = std::string(LENDOPT_CLI_PATH) + " " + args + " > " +
                    (g_dir / "stdout.txt").string() + " 2> " +
                    (g_dir / "stderr.txt").string();
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

static std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

static void solve_exo_outputs() {
  int rc = run_cli("solve-exo --rho 0.95 --d 0.8333333333333333 --dist uniform "
                   "--grid 400 --out " + g_dir.string());
  CHECK(rc == 0);

  auto summary = read_csv((g_dir / "exo_summary.csv").string());
  CHECK(summary.header == std::vector<std::string>({"key", "value"}));
  // the summary CSV carries the threshold row
  std::string text = slurp(g_dir / "exo_summary.csv");
  CHECK(text.find("x_bar,0.42424242424242") != std::string::npos);

  auto grid = read_csv((g_dir / "exo_value.csv").string());
  CHECK(grid.header == std::vector<std::string>({"x", "J", "y"}));
  CHECK(grid.rows.size() >= 400);

  // LF line endings, no trailing spaces
  std::string raw = slurp(g_dir / "exo_value.csv");
  CHECK(raw.find('\r') == std::string::npos);
  CHECK(raw.back() == '\n');

  // emitted doubles round-trip bit-exact through the 17-digit format
  for (size_t i = 0; i < grid.rows.size(); i += 97) {
    for (double v : grid.rows[i]) {
      CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
  }
  // re-solving in process reproduces the file contents exactly
  ExoParams params{0.95, 0.8333333333333333};
  auto vf = value_iteration_exo(IncomeDistribution::uniform(), params, 400, 1e-9);
  CHECK(static_cast<size_t>(vf.x.size()) == grid.rows.size());
  CHECK(grid.rows[7][0] == vf.x[7]);
  CHECK(grid.rows[7][1] == vf.j[7]);
  CHECK(grid.rows[7][2] == vf.y[7]);

  auto traj = read_csv((g_dir / "exo_trajectory.csv").string());
  CHECK(traj.rows.size() == 200);
  for (size_t t = 1; t < traj.rows.size(); ++t)
    CHECK(traj.rows[t][1] >= traj.rows[t - 1][1]);
  CHECK_CLOSE(traj.rows.back()[1], vf.x_bar, 1e-2);
}

static void verify_suite_exit_code() {
  CHECK(run_cli("verify --suite invariants --jobs 4") == 0);
  std::string out = slurp(g_dir / "stdout.txt");
  CHECK(out.find("[PASS]") != std::string::npos);
  CHECK(out.find("[FAIL]") == std::string::npos);
}

static void config_parsers() {
  using lendopt::parse_distribution;
  CHECK(parse_distribution(Json{{"kind", "gamma"}, {"shape", 2.0}, {"scale", 1.0}})
            .kind() == IncomeDistribution::Kind::Gamma);
  CHECK(parse_distribution(Json{{"kind", "weibull"}, {"k", 2.0}, {"lambda", 1.0}})
            .kind() == IncomeDistribution::Kind::Weibull);
  CHECK(parse_distribution(Json{{"kind", "two_point"}, {"center", 0.5},
                                {"spread", 0.25}})
            .kind() == IncomeDistribution::Kind::TwoPoint);
  Json emp;
  emp["kind"] = "empirical";
  emp["x"] = {0.0, 0.5, 1.0};
  emp["cdf"] = {0.0, 0.5, 1.0};
  CHECK(parse_distribution(emp).kind() == IncomeDistribution::Kind::Empirical);
  CHECK_THROWS(parse_distribution(Json{{"kind", "cauchy"}}), ConfigError);
  CHECK_THROWS(parse_distribution(Json{{"kind", "beta"}, {"a", 2.0}}), ConfigError);
  CHECK_THROWS(parse_distribution(Json{{"kind", "beta"}, {"a", 2.0}, {"b", 2.0},
                                       {"c", 1.0}}),
               ConfigError);
  CHECK_THROWS(parse_distribution_flag("beta:2"), ConfigError);
  CHECK(parse_distribution_flag("weibull:2,1").kind() ==
        IncomeDistribution::Kind::Weibull);

  Json tb;
  tb["kind"] = "table";
  tb["points"] = Json::array();
  for (int i = 0; i <= 40; ++i) {
    double d = 1e-4 * std::pow(0.95 / 1e-4, i / 40.0);
    tb["points"].push_back({d, 0.8 * std::sqrt(d) * std::exp(0.1 * d)});
  }
  auto dem = parse_demand(tb);
  CHECK(dem.classify_regime(0.95, 100).regime == ElasticityRegime::Increasing);
  CHECK_THROWS(parse_demand(Json{{"kind", "constant_elasticity"}}), ConfigError);
}

static void increasing_elasticity_via_config() {
  // a tabulated demand with rising elasticity routes to the aggressive
  // grand experiment
  Json cfg;
  cfg["model"] = {{"kind", "endo"}, {"rho", 0.95}};
  cfg["distribution"] = {{"kind", "uniform"}};
  Json pts = Json::array();
  for (int i = 0; i <= 200; ++i) {
    double d = 1e-4 * std::pow(0.95 / 1e-4, i / 200.0);
    pts.push_back({d, 0.8 * std::sqrt(d) * std::exp(0.1 * d)});
  }
  cfg["demand"] = {{"kind", "table"}, {"points", pts}};
  std::ofstream((g_dir / "inc.json")) << cfg.dump();
  CHECK(run_cli("solve-endo --config " + (g_dir / "inc.json").string() +
                " --format json --out " + g_dir.string()) == 0);
  Json j = Json::parse(slurp(g_dir / "endo_summary.json"));
  CHECK(j["regime"].get<std::string>() == "increasing");
  CHECK(j["y0"].get<double>() >= j["x_bar"].get<double>() - 1e-9);
  CHECK(j["d0"].get<double>() < j["d_star"].get<double>());
}

static void env_output_directory() {
  fs::path env_dir = g_dir / "env_out";
  std::string cmd = "LENDOPT_OUT_DIR=" + env_dir.string() + " " + LENDOPT_CLI_PATH +
                    " two-point --alpha 0.5 --rho 0.95 --deltas 10 > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  CHECK(WIFEXITED(rc) && WEXITSTATUS(rc) == 0);
  CHECK(fs::exists(env_dir / "two_point.csv"));
}

static void solve_endo_outputs() {
  int rc = run_cli("solve-endo --alpha 1 --rho 0.95 --dist uniform --format json "
                   "--out " + g_dir.string());
  CHECK(rc == 0);
  Json j = Json::parse(slurp(g_dir / "endo_summary.json"));
  auto demand = DemandFunction::constant_elasticity(1.0);
  double ds = demand.solve_d_star(0.95);
  CHECK(j["d_star"].get<double>() == ds);
  CHECK_CLOSE(j["x_bar"].get<double>(), 1.0 / 3.0, 1e-10);
  CHECK_CLOSE(j["d0"].get<double>(), 2.0 / 3.0 * ds, 1e-10);
  CHECK_CLOSE(j["e_npv"].get<double>(), ds * ds * 4.0 / 27.0, 1e-12);
  CHECK(j["regime"].get<std::string>() == "constant");
}

static void config_precedence_and_errors() {
  // flags override file values
  Json cfg;
  cfg["model"] = {{"kind", "endo"}, {"rho", 0.95}, {"alpha", 0.4}};
  cfg["distribution"] = {{"kind", "uniform"}};
  std::ofstream((g_dir / "cfg.json")) << cfg.dump();
  int rc = run_cli("solve-endo --config " + (g_dir / "cfg.json").string() +
                   " --alpha 1 --format json --out " + g_dir.string());
  CHECK(rc == 0);
  Json j = Json::parse(slurp(g_dir / "endo_summary.json"));
  CHECK_CLOSE(j["x_bar"].get<double>(), 1.0 / 3.0, 1e-10);  // alpha=1 wins

  // unknown keys are rejected with exit code 1
  Json bad = cfg;
  bad["model"]["typo"] = 1;
  std::ofstream((g_dir / "bad.json")) << bad.dump();
  CHECK(run_cli("solve-endo --config " + (g_dir / "bad.json").string()) == 1);
  CHECK(run_cli("solve-endo --config " + (g_dir / "missing.json").string()) == 1);
  CHECK(slurp(g_dir / "stderr.txt").find("config error") != std::string::npos);

  // solver failures exit with 2
  CHECK(run_cli("solve-exo --rho 0.8 --d 0.9 --dist uniform --out " +
                g_dir.string()) == 2);
}

static void simulate_determinism() {
  std::string args = "simulate --model endo --alpha 1 --rho 0.95 --dist uniform "
                     "--paths 50000 --seed 7 --jobs 3 --format json --out " +
                     g_dir.string();
  CHECK(run_cli(args) == 0);
  Json first = Json::parse(slurp(g_dir / "simulate_summary.json"));
  CHECK(run_cli(args) == 0);
  Json second = Json::parse(slurp(g_dir / "simulate_summary.json"));
  first.erase("seconds");  // wall time is the one legitimately varying field
  second.erase("seconds");
  CHECK(first.dump() == second.dump());
  Json j = first;
  CHECK(std::abs(j["z"].get<double>()) <= 3.0);
  auto hist = read_csv((g_dir / "simulate_histogram.csv").string());
  CHECK(hist.rows.size() > 10);
}

static void sweep_and_friends() {
  CHECK(run_cli("sweep-variance --alpha 0.5 --rho 0.95 --jobs 4 --out " +
                g_dir.string()) == 0);
  auto sweep = read_csv((g_dir / "variance_sweep_alpha0.5.csv").string());
  CHECK(sweep.rows.size() == 60);
  Json vs = Json::parse(slurp(g_dir / "stdout.txt"));
  CHECK(vs["0.500000"]["u_shaped"].get<bool>());

  CHECK(run_cli("two-point --alpha 0.5 --rho 0.95 --u 0.5 --deltas 40 --out " +
                g_dir.string()) == 0);
  auto tp = read_csv((g_dir / "two_point.csv").string());
  CHECK(tp.rows.size() == 41);

  CHECK(run_cli("hybrid --model exo --rho 0.95 --d 0.8333333333333333 "
                "--dist uniform --points 100 --jobs 4 --out " + g_dir.string()) == 0);
  auto hx = read_csv((g_dir / "hybrid_npv.csv").string());
  CHECK(hx.rows.size() == 100);
  for (const auto& row : hx.rows) CHECK(row[1] >= row[2] - 1e-9);  // dominance
  auto adv = read_csv((g_dir / "advantage_vs_d.csv").string());
  CHECK(adv.rows.size() == 25);
  for (size_t i = 1; i < adv.rows.size(); ++i) {
    CHECK(adv.rows[i][2] < adv.rows[i - 1][2]);  // both NPVs shrink with d
    CHECK(adv.rows[i][3] > adv.rows[i - 1][3]);  // the signal's edge grows
  }

  CHECK(run_cli("hybrid --model endo --alpha 0.5 --rho 0.95 --points 100 --out " +
                g_dir.string()) == 0);
  auto inc = read_csv((g_dir / "inclusiveness.csv").string());
  CHECK(inc.rows.size() == 100);
  for (const auto& row : inc.rows) {
    CHECK(row[2] >= row[1] - 1e-12);  // hybrid loan dominates
    CHECK(row[4] >= row[3] - 1e-12);  // hybrid retention dominates
  }

  CHECK(run_cli("segment --rho 0.95 --d 0.8333333333333333 --dist uniform "
                "--kmax 40 --out " + g_dir.string()) == 0);
  auto seg = read_csv((g_dir / "segments.csv").string());
  CHECK(seg.rows.size() == 41);
  CHECK(seg.rows[0][4] < 0.0);  // type-0 NPV negative
}

int main() {
  g_dir = fs::temp_directory_path() / "lendopt_cli_test";
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);
  solve_exo_outputs();
  solve_endo_outputs();
  config_precedence_and_errors();
  simulate_determinism();
  sweep_and_friends();
  config_parsers();
  increasing_elasticity_via_config();
  verify_suite_exit_code();
  env_output_directory();
  return testutil::summary("cli");
}
