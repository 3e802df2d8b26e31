// lendopt: solvers, sweeps, and simulations for dynamic lending policies.
//
// Subcommands: solve-exo, solve-endo, hybrid, segment, sweep-variance,
// two-point, simulate, verify. Outputs CSV/JSON; flags override config-file
// values. Exit codes: 1 config error, 2 solver failure, 3 verification
// failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "lendopt/analysis.hpp"
#include "lendopt/hybrid.hpp"
#include "lendopt/io.hpp"
#include "lendopt/mc_sim.hpp"
#include "lendopt/verify.hpp"

namespace {

using namespace lendopt;

struct CommonOpts {
  std::string config_path;
  std::string dist_flag;
  std::string out_dir;
  std::string format;
  double rho = -1.0, d = -1.0, alpha = -1.0, x0 = -1.0;
  long long paths = -1;
  long long seed = -1;
  int horizon = -1;
  int grid = -1;
  double tol = -1.0;
  int jobs = 1;
  bool antithetic = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--format", o.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--jobs", o.jobs, "worker threads for sweeps/simulation");
}

/// config file first, then flag overrides, then the environment default dir
struct Resolved {
  ExperimentConfig cfg;
  IncomeDistribution dist = IncomeDistribution::uniform();
  double rho = 0.95;
  double d = 5.0 / 6.0;
  double alpha = 1.0;
  double x0 = 0.0;
  bool have_d = false, have_alpha = false;
};

Resolved resolve(const CommonOpts& o) {
  Resolved r;
  if (!o.config_path.empty()) r.cfg = ExperimentConfig::from_file(o.config_path);
  if (!r.cfg.model.is_null()) {
    if (r.cfg.model.contains("rho")) r.rho = r.cfg.model["rho"].get<double>();
    if (r.cfg.model.contains("d")) {
      r.d = r.cfg.model["d"].get<double>();
      r.have_d = true;
    }
    if (r.cfg.model.contains("alpha")) {
      r.alpha = r.cfg.model["alpha"].get<double>();
      r.have_alpha = true;
    }
    if (r.cfg.model.contains("x0")) r.x0 = r.cfg.model["x0"].get<double>();
  }
  if (!r.cfg.distribution.is_null()) r.dist = parse_distribution(r.cfg.distribution);
  if (!o.dist_flag.empty()) r.dist = parse_distribution_flag(o.dist_flag);
  if (o.rho >= 0) r.rho = o.rho;
  if (o.d >= 0) {
    r.d = o.d;
    r.have_d = true;
  }
  if (o.alpha >= 0) {
    r.alpha = o.alpha;
    r.have_alpha = true;
  }
  if (o.x0 >= 0) r.x0 = o.x0;
  if (o.grid > 0) r.cfg.solver.grid = o.grid;
  if (o.tol > 0) r.cfg.solver.tol = o.tol;
  if (o.paths > 0) r.cfg.simulation.paths = o.paths;
  if (o.seed >= 0) r.cfg.simulation.seed = static_cast<uint64_t>(o.seed);
  if (o.horizon > 0) r.cfg.simulation.horizon = o.horizon;
  if (o.antithetic) r.cfg.simulation.antithetic = true;
  if (!o.format.empty()) r.cfg.format = o.format;
  if (!o.out_dir.empty()) {
    r.cfg.output_dir = o.out_dir;
  } else if (r.cfg.output_dir == ".") {
    if (const char* env = std::getenv("LENDOPT_OUT_DIR")) r.cfg.output_dir = env;
  }
  return r;
}

std::string out_path(const Resolved& r, const std::string& name) {
  return r.cfg.output_dir + "/" + name;
}

void emit_summary(const Resolved& r, const std::string& stem, const Json& summary) {
  if (r.cfg.format == "json") {
    write_json_atomic(out_path(r, stem + ".json"), summary);
  } else {
    // key/value rows; values keep 17 significant digits
    std::ostringstream text;
    text << "key,value\n";
    for (auto it = summary.begin(); it != summary.end(); ++it) {
      text << it.key() << ',';
      if (it.value().is_number_float())
        text << format_double(it.value().get<double>());
      else
        text << it.value().dump();
      text << '\n';
    }
    write_text_atomic(out_path(r, stem + ".csv"), text.str());
  }
  std::cout << summary.dump(2) << "\n";
}

int cmd_solve_exo(const CommonOpts& o) {
  Resolved r = resolve(o);
  if (!r.have_d) throw ConfigError("solve-exo: need --d (or model.d)");
  ExoParams params{r.rho, r.d};
  double x_bar = threshold_exo(r.dist, params);
  Json summary;
  summary["model"] = "exo";
  summary["distribution"] = r.dist.name();
  summary["rho"] = r.rho;
  summary["d"] = r.d;
  summary["x_bar"] = x_bar;
  if (r.dist.kind() == IncomeDistribution::Kind::Uniform) {
    auto cf = UniformClosedForm::solve(params);
    summary["m"] = cf.m;
    summary["n"] = cf.n;
    summary["a"] = cf.a;
    summary["b"] = cf.b;
    summary["c"] = cf.c;
    summary["npv_dynamic"] = cf.value(0.0);
  }
  auto vf = value_iteration_exo(r.dist, params, r.cfg.solver.grid, r.cfg.solver.tol,
                                r.cfg.solver.max_iterations);
  summary["iterations"] = vf.iterations;
  summary["residual"] = vf.residual;
  if (!summary.contains("npv_dynamic")) summary["npv_dynamic"] = vf.value_at(0.0);

  CsvTable grid;
  grid.header = {"x", "J", "y"};
  for (int i = 0; i < vf.x.size(); ++i)
    grid.rows.push_back({vf.x[i], vf.j[i], vf.y[i]});
  write_csv_atomic(out_path(r, "exo_value.csv"), grid);

  auto traj = le_trajectory([&](double q) { return vf.policy_at(q); }, r.x0, 200);
  CsvTable tj;
  tj.header = {"t", "y_t"};
  for (size_t t = 0; t < traj.size(); ++t)
    tj.rows.push_back({static_cast<double>(t), traj[t]});
  write_csv_atomic(out_path(r, "exo_trajectory.csv"), tj);
  emit_summary(r, "exo_summary", summary);
  return 0;
}

int cmd_solve_endo(const CommonOpts& o) {
  Resolved r = resolve(o);
  DemandFunction demand = r.cfg.demand.is_null()
                              ? DemandFunction::constant_elasticity(r.alpha)
                              : parse_demand(r.cfg.demand);
  if (r.have_alpha) demand = DemandFunction::constant_elasticity(r.alpha);
  EndoParams params{r.rho, demand};
  auto profile = demand.classify_regime(r.rho, 400, 1e-6);
  EndoCore core = solve_endo_core(r.dist, params);

  Json summary;
  summary["model"] = "endo";
  summary["distribution"] = r.dist.name();
  summary["demand"] = demand.name();
  summary["regime"] = to_string(profile.regime);
  summary["rho"] = r.rho;
  summary["d_star"] = core.d_star;
  summary["x_bar"] = core.x_bar;
  summary["beta"] = core.beta;

  if (profile.regime == ElasticityRegime::Constant && demand.is_constant_elasticity()) {
    auto ge = ge_constant_elasticity(r.dist, params, r.x0);
    summary["y0"] = ge.y0;
    summary["d0"] = ge.d0;
    summary["e_npv"] = expected_npv_ge(r.dist, demand.alpha(), r.rho);
  } else if (profile.regime == ElasticityRegime::Increasing) {
    auto ge = ge_increasing_elasticity(r.dist, params, r.x0);
    summary["y0"] = ge.y0;
    summary["d0"] = ge.d0;
  } else if (profile.regime == ElasticityRegime::Decreasing) {
    auto vf = le_decreasing_elasticity(r.dist, params, r.cfg.solver.grid,
                                       std::max(r.cfg.solver.tol, 1e-8),
                                       r.cfg.solver.max_iterations);
    summary["iterations"] = vf.iterations;
    summary["npv_dynamic"] = vf.value_at(0.0);
    CsvTable grid;
    grid.header = {"x", "J", "y", "d"};
    for (int i = 0; i < vf.x.size(); ++i)
      grid.rows.push_back({vf.x[i], vf.j[i], vf.y[i], vf.d[i]});
    write_csv_atomic(out_path(r, "endo_value.csv"), grid);
  } else {
    throw std::runtime_error("solve-endo: mixed elasticity regime is not covered");
  }
  emit_summary(r, "endo_summary", summary);
  return 0;
}

int cmd_hybrid(const CommonOpts& o, const std::string& model_kind, int n_grid) {
  Resolved r = resolve(o);
  CsvTable table;
  table.header = {"x0", "npv_hybrid", "npv_dynamic"};
  Json summary;
  summary["model"] = model_kind;
  if (model_kind == "exo") {
    if (!r.have_d) throw ConfigError("hybrid: need --d for the exo model");
    auto model = make_exo_model(r.dist, ExoParams{r.rho, r.d}, r.cfg.solver.grid,
                                r.cfg.solver.tol);
    for (int i = 0; i < n_grid; ++i) {
      double x0 = r.dist.upper_trunc() * i / n_grid;
      table.rows.push_back({x0, hybrid_npv_exo(model, x0), model.npv_dynamic});
    }
    summary["x_bar"] = model.x_bar;
    summary["npv_dynamic"] = model.npv_dynamic;
    summary["relative_advantage"] = relative_advantage_exo(r.dist, model);

    // architecture comparison across the rate margin
    CsvTable adv;
    adv.header = {"d", "e_npv_hybrid", "npv_dynamic", "relative_advantage"};
    int nd = 25;
    adv.rows.resize(nd);
    parallel_for(nd, o.jobs, [&](int i) {
      double d = r.rho * (0.55 + 0.43 * i / (nd - 1.0));
      auto m = make_exo_model(r.dist, ExoParams{r.rho, d}, r.cfg.solver.grid,
                              r.cfg.solver.tol);
      double ra = relative_advantage_exo(r.dist, m);
      adv.rows[i] = {d, m.npv_dynamic * (1.0 + ra), m.npv_dynamic, ra};
    });
    write_csv_atomic(out_path(r, "advantage_vs_d.csv"), adv);
  } else {
    auto model = make_endo_const_model(r.dist, r.alpha, r.rho);
    for (int i = 0; i < n_grid; ++i) {
      double x0 = r.dist.upper_trunc() * i / n_grid;
      table.rows.push_back({x0, model.npv(x0), model.npv(0.0)});
    }
    summary["x_bar"] = model.x_bar;
    summary["d_star"] = model.d_star;
    summary["npv_dynamic"] = model.npv(0.0);
    summary["relative_advantage"] = relative_advantage_endo(model);

    // sweep the elasticity so the long-run rate traces out the margin axis
    CsvTable adv;
    adv.header = {"alpha", "d_star", "e_npv_hybrid", "npv_dynamic",
                  "relative_advantage"};
    int na = 25;
    adv.rows.resize(na);
    parallel_for(na, o.jobs, [&](int i) {
      double alpha = 0.05 + 0.93 * i / (na - 1.0);
      auto m = make_endo_const_model(r.dist, alpha, r.rho);
      double ra = relative_advantage_endo(m);
      double pd = m.npv(0.0);
      adv.rows[i] = {alpha, m.d_star, pd * (1.0 + ra), pd, ra};
    });
    write_csv_atomic(out_path(r, "advantage_vs_dstar.csv"), adv);

    CsvTable inc;
    inc.header = {"x0", "loan_dynamic", "loan_hybrid", "retention_dynamic",
                  "retention_hybrid"};
    std::vector<double> x0s;
    for (int i = 0; i < n_grid; ++i) x0s.push_back(r.dist.upper_trunc() * i / n_grid);
    for (const auto& row : inclusiveness_compare(model, x0s))
      inc.rows.push_back({row.x0, row.loan_dynamic, row.loan_hybrid,
                          row.retention_dynamic, row.retention_hybrid});
    write_csv_atomic(out_path(r, "inclusiveness.csv"), inc);
  }
  write_csv_atomic(out_path(r, "hybrid_npv.csv"), table);
  emit_summary(r, "hybrid_summary", summary);
  return 0;
}

int cmd_segment(const CommonOpts& o, int k_max) {
  Resolved r = resolve(o);
  if (!r.have_d) throw ConfigError("segment: need --d");
  ExoParams params{r.rho, r.d};
  auto traj = le_trajectory_exo(r.dist, params, 0.0, k_max + 60);
  double x_bar = threshold_exo(r.dist, params);
  auto rep = npv_by_type(traj, params, k_max, x_bar);
  auto seg = segments(rep, r.dist.upper_trunc());

  CsvTable table;
  table.header = {"k", "y_k", "pv_interest", "pv_default_loss", "npv"};
  for (int k = 0; k <= k_max; ++k)
    table.rows.push_back({static_cast<double>(k), traj[k], rep.pv_interest[k],
                          rep.pv_default[k], rep.npv[k]});
  write_csv_atomic(out_path(r, "segments.csv"), table);

  Json summary;
  summary["k_star"] = rep.k_star;
  summary["theta_star"] = rep.theta_star;
  summary["x_bar"] = x_bar;
  summary["npv_creditworthy"] = rep.npv_creditworthy;
  summary["segments_nonempty"] = seg.nonempty;
  emit_summary(r, "segment_summary", summary);
  return 0;
}

int cmd_sweep_variance(const CommonOpts& o) {
  Resolved r = resolve(o);
  Eigen::ArrayXd grid =
      geomspace(r.cfg.sweep.a_min, r.cfg.sweep.a_max, r.cfg.sweep.points);
  std::vector<double> a_grid(grid.data(), grid.data() + grid.size());
  std::vector<double> alphas = r.cfg.sweep.alphas;
  if (r.have_alpha) alphas = {r.alpha};
  Json summary;
  for (double alpha : alphas) {
    auto sweep = variance_sweep_beta(alpha, r.rho, a_grid, o.jobs);
    CsvTable table;
    table.header = {"a", "variance", "x_bar", "e_npv"};
    for (const auto& row : sweep.rows)
      table.rows.push_back({row.a, row.variance, row.x_bar, row.e_npv});
    std::ostringstream name;
    name << "variance_sweep_alpha" << alpha << ".csv";
    write_csv_atomic(out_path(r, name.str()), table);
    Json entry;
    entry["u_shaped"] = sweep.u_shaped;
    entry["transitions"] = sweep.transitions;
    entry["bernoulli_value"] = sweep.bernoulli_value;
    entry["degenerate_value"] = sweep.degenerate_value;
    summary[std::to_string(alpha)] = entry;
  }
  emit_summary(r, "variance_sweep_summary", summary);
  return 0;
}

int cmd_two_point(const CommonOpts& o, double u_mean, int n_delta) {
  Resolved r = resolve(o);
  std::vector<double> deltas;
  for (int i = 0; i <= n_delta; ++i) deltas.push_back(u_mean * i / n_delta);
  auto table = two_point_example(r.alpha, r.rho, u_mean, deltas);
  CsvTable csv;
  csv.header = {"delta", "pi_a", "pi_b", "winner_is_a"};
  for (const auto& row : table.rows)
    csv.rows.push_back({row.delta, row.pi_a, row.pi_b, row.winner == 'A' ? 1.0 : 0.0});
  write_csv_atomic(out_path(r, "two_point.csv"), csv);
  Json summary;
  summary["crossing"] = table.crossing;
  summary["d0"] = table.d0;
  summary["d_star"] = table.d_star;
  summary["beta"] = table.beta;
  emit_summary(r, "two_point_summary", summary);
  return 0;
}

int cmd_simulate(const CommonOpts& o, const std::string& model_kind) {
  Resolved r = resolve(o);
  SimConfig cfg;
  cfg.n_paths = r.cfg.simulation.paths;
  cfg.seed = r.cfg.simulation.seed;
  cfg.horizon = r.cfg.simulation.horizon;
  cfg.antithetic = r.cfg.simulation.antithetic;
  cfg.jobs = o.jobs;

  SimResult res;
  double analytic = 0.0;
  std::vector<double> traj;
  if (model_kind == "exo") {
    if (!r.have_d) throw ConfigError("simulate: need --d for the exo model");
    ExoParams params{r.rho, r.d};
    auto model = make_exo_model(r.dist, params, r.cfg.solver.grid, r.cfg.solver.tol);
    traj = le_trajectory(model.policy, 0.0, 400);
    auto pol = SimPolicy::exo(traj, model.x_bar, r.d);
    res = simulate_cohort(r.dist, pol, r.rho, cfg);
    analytic = model.npv_dynamic;
  } else {
    auto demand = DemandFunction::constant_elasticity(r.alpha);
    EndoParams params{r.rho, demand};
    auto ge = ge_constant_elasticity(r.dist, params);
    traj = {ge.y0};
    auto pol = SimPolicy::endo_ge(ge, demand);
    res = simulate_cohort(r.dist, pol, r.rho, cfg);
    analytic = expected_npv_ge(r.dist, r.alpha, r.rho);
  }

  Json summary;
  summary["model"] = model_kind;
  summary["paths"] = res.n_paths;
  summary["seed"] = cfg.seed;
  summary["mean_npv"] = res.mean_npv;
  summary["std_error"] = res.std_error;
  summary["analytic_npv"] = analytic;
  summary["z"] = (res.mean_npv - analytic) / res.std_error;
  summary["balk_count"] = res.balk_count;
  summary["creditworthy_count"] = res.survive_count;
  summary["seconds"] = res.elapsed_seconds;

  CsvTable hist;
  hist.header = {"k", "defaults"};
  for (size_t k = 0; k < res.default_counts.size(); ++k)
    hist.rows.push_back({static_cast<double>(k),
                         static_cast<double>(res.default_counts[k])});
  write_csv_atomic(out_path(r, "simulate_histogram.csv"), hist);
  emit_summary(r, "simulate_summary", summary);
  return 0;
}

int cmd_verify(const std::string& suite, int jobs) {
  std::vector<CheckResult> results;
  if (suite == "acceptance" || suite == "all") {
    auto a = run_acceptance_suite(jobs);
    results.insert(results.end(), a.begin(), a.end());
  }
  if (suite == "invariants" || suite == "all") {
    auto i = run_invariant_suite(jobs);
    results.insert(results.end(), i.begin(), i.end());
  }
  print_results(results, std::cout);
  return all_pass(results) ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic lending policy toolkit"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string model_kind = "exo";
  std::string suite = "all";
  int n_grid = 200;
  int k_max = 60;
  double u_mean = 0.5;
  int n_delta = 50;

  auto* solve_exo = app.add_subcommand("solve-exo", "exogenous-rate policy");
  add_common(solve_exo, o);
  solve_exo->add_option("--rho", o.rho);
  solve_exo->add_option("--d", o.d);
  solve_exo->add_option("--x0", o.x0);
  solve_exo->add_option("--dist", o.dist_flag);
  solve_exo->add_option("--grid", o.grid);
  solve_exo->add_option("--tol", o.tol);

  auto* solve_endo = app.add_subcommand("solve-endo", "endogenous-rate policy");
  add_common(solve_endo, o);
  solve_endo->add_option("--rho", o.rho);
  solve_endo->add_option("--alpha", o.alpha);
  solve_endo->add_option("--x0", o.x0);
  solve_endo->add_option("--dist", o.dist_flag);
  solve_endo->add_option("--grid", o.grid);
  solve_endo->add_option("--tol", o.tol);

  auto* hybrid = app.add_subcommand("hybrid", "signal-conditioned policies");
  add_common(hybrid, o);
  hybrid->add_option("--model", model_kind)->check(CLI::IsMember({"exo", "endo"}));
  hybrid->add_option("--rho", o.rho);
  hybrid->add_option("--d", o.d);
  hybrid->add_option("--alpha", o.alpha);
  hybrid->add_option("--dist", o.dist_flag);
  hybrid->add_option("--points", n_grid);

  auto* segment = app.add_subcommand("segment", "per-type NPV decomposition");
  add_common(segment, o);
  segment->add_option("--rho", o.rho);
  segment->add_option("--d", o.d);
  segment->add_option("--dist", o.dist_flag);
  segment->add_option("--kmax", k_max);

  auto* sweep = app.add_subcommand("sweep-variance", "income variability sweep");
  add_common(sweep, o);
  sweep->add_option("--rho", o.rho);
  sweep->add_option("--alpha", o.alpha);

  auto* two_point = app.add_subcommand("two-point", "two-atom income example");
  add_common(two_point, o);
  two_point->add_option("--rho", o.rho);
  two_point->add_option("--alpha", o.alpha);
  two_point->add_option("--u", u_mean);
  two_point->add_option("--deltas", n_delta);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo cohort replay");
  add_common(simulate, o);
  simulate->add_option("--model", model_kind)->check(CLI::IsMember({"exo", "endo"}));
  simulate->add_option("--rho", o.rho);
  simulate->add_option("--d", o.d);
  simulate->add_option("--alpha", o.alpha);
  simulate->add_option("--dist", o.dist_flag);
  simulate->add_option("--paths", o.paths);
  simulate->add_option("--seed", o.seed);
  simulate->add_option("--horizon", o.horizon);
  simulate->add_flag("--antithetic", o.antithetic);

  auto* verify = app.add_subcommand("verify", "run the property suites");
  verify->add_option("--suite", suite)
      ->check(CLI::IsMember({"all", "acceptance", "invariants"}));
  verify->add_option("--jobs", o.jobs);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_exo->parsed()) return cmd_solve_exo(o);
    if (solve_endo->parsed()) return cmd_solve_endo(o);
    if (hybrid->parsed()) return cmd_hybrid(o, model_kind, n_grid);
    if (segment->parsed()) return cmd_segment(o, k_max);
    if (sweep->parsed()) return cmd_sweep_variance(o);
    if (two_point->parsed()) return cmd_two_point(o, u_mean, n_delta);
    if (simulate->parsed()) return cmd_simulate(o, model_kind);
    if (verify->parsed()) return cmd_verify(suite, o.jobs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
