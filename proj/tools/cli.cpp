#include "cli.hpp"

#include "verify.hpp"

#include <stacklq/log.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace stacklq::cli {

namespace fs = std::filesystem;

namespace {

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  csv::to_file(path, [&](std::ostream& os) { os << text; });
}

// Loads and validates the spec, printing violations. Returns nullopt-like
// failure through the exit code.
struct Loaded {
  GameSpec spec;
  ValidationReport report;
};

Loaded load(const RunConfig& cfg) {
  Loaded l{load_spec(cfg.spec_path), {}};
  if (cfg.steps) {
    if (*cfg.steps < 2) throw DomainError("--steps must be at least 2");
    l.spec = verify::with_steps(l.spec, *cfg.steps);
  }
  l.report = validate_spec(l.spec);
  return l;
}

std::string describe(const ValidationReport& r) {
  std::ostringstream os;
  for (const Violation& v : r.violations) {
    os << v.field;
    if (v.time) os << " (t=" << *v.time << ")";
    os << ": " << v.message << '\n';
  }
  return os.str();
}

bool reject_invalid(const Loaded& l) {
  if (l.report.ok()) return false;
  std::cerr << "invalid spec:\n" << describe(l.report);
  return true;
}

}  // namespace

int cmd_validate(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const Loaded l = load(cfg);
  const std::string text = l.report.ok() ? std::string("ok\n") : describe(l.report);
  write_text(out_path(cfg, "validation_report.txt"), text);
  if (!l.report.ok()) {
    std::cerr << text;
    return kValidation;
  }
  std::cout << "spec is valid\n";
  return kOk;
}

int cmd_solve(const RunConfig& cfg) {
  const Loaded l = load(cfg);
  if (reject_invalid(l)) return kValidation;
  fs::create_directories(cfg.output_dir);
  const RiccatiBundle b = solve_riccati(l.spec);
  const OffsetBundle o = solve_offsets(b);
  const FeedbackLaw law = build_feedback(b, o, cfg.sabotage);

  const std::pair<const char*, const MatrixTrajectory*> files[] = {
      {"p.csv", &b.p},     {"P1.csv", &b.P1},   {"P2.csv", &b.P2},      {"Pf1.csv", &b.Pf1},
      {"Pf2.csv", &b.Pf2}, {"Pf3.csv", &b.Pf3}, {"Omega.csv", &o.Omega},
  };
  for (const auto& [name, traj] : files) {
    csv::to_file(out_path(cfg, name), [&](std::ostream& os) { csv::write_trajectory(os, *traj); });
  }
  csv::to_file(out_path(cfg, "gains.csv"), [&](std::ostream& os) { csv::write_gains(os, law); });

  const int n = l.spec.n;
  const auto& G = l.spec.costs.player;
  Mat G2 = Mat::Zero(2 * n, 2 * n);
  G2.topLeftCorner(n, n) = G[1].G;
  Mat G3 = Mat::Zero(4 * n, 4 * n);
  G3.topLeftCorner(n, n) = G[2].G;
  const std::pair<const char*, double> terminal[] = {
      {"p(T) - G1", (b.p.back() - G[0].G).cwiseAbs().maxCoeff()},
      {"P1(T) - diag(G2, 0)", (b.P1.back() - G2).cwiseAbs().maxCoeff()},
      {"P2(T)", b.P2.back().cwiseAbs().maxCoeff()},
      {"Pf1(T) - diag(G3, 0)", (b.Pf1.back() - G3).cwiseAbs().maxCoeff()},
      {"Pf2(T)", b.Pf2.back().cwiseAbs().maxCoeff()},
      {"Pf3(T)", b.Pf3.back().cwiseAbs().maxCoeff()},
      {"Omega(T)", o.Omega.back().cwiseAbs().maxCoeff()},
  };
  const ResidualReport r = residuals(b, o);
  std::ostringstream os;
  os << "solver grid: " << b.grid.steps() << " steps on [0, " << b.grid.horizon() << "]\n";
  os << "terminal conditions (max abs deviation):\n";
  for (const auto& [name, v] : terminal) os << "  " << name << ": " << csv::num(v) << '\n';
  os << "centered residual maxima:\n";
  os << "  p: " << csv::num(r.p) << "\n  P1: " << csv::num(r.P1) << "\n  P2: " << csv::num(r.P2)
     << "\n  Pf1: " << csv::num(r.Pf1) << "\n  Pf2: " << csv::num(r.Pf2)
     << "\n  Pf3: " << csv::num(r.Pf3) << "\n  Omega: " << csv::num(r.Omega) << '\n';
  os << "p(0)[0,0] = " << csv::num(b.p.front()(0, 0)) << '\n';
  write_text(out_path(cfg, "summary.txt"), os.str());
  std::cout << os.str();
  return kOk;
}

int cmd_simulate(const RunConfig& cfg) {
  if (cfg.n_paths < 1) throw DomainError("--paths must be at least 1");
  const Loaded l = load(cfg);
  if (reject_invalid(l)) return kValidation;
  fs::create_directories(cfg.output_dir);
  const auto law = verify::solve_law(l.spec, cfg.sabotage);
  const PathBundle bundle =
      simulate_equilibrium(*law, NoiseSource(cfg.seed), cfg.n_paths, cfg.threads);

  std::vector<CostEstimate> costs;
  for (int i = 1; i <= 3; ++i) costs.push_back(estimate_cost(l.spec, law->grid(), i, bundle));
  csv::to_file(out_path(cfg, "costs.csv"), [&](std::ostream& os) { csv::write_costs(os, costs); });

  PathBundle dump;
  dump.grid = bundle.grid;
  dump.seed = bundle.seed;
  dump.first_path = bundle.first_path;
  const std::size_t keep = std::min(cfg.dump_paths, bundle.paths.size());
  dump.paths.assign(bundle.paths.begin(), bundle.paths.begin() + static_cast<long>(keep));
  csv::to_file(out_path(cfg, "paths.csv"),
               [&](std::ostream& os) { csv::write_paths(os, dump, cfg.thin); });

  std::ostringstream os;
  os << "simulated " << cfg.n_paths << " paths, " << law->grid().steps() << " steps, seed "
     << cfg.seed << '\n';
  for (const CostEstimate& c : costs) {
    os << "  J" << c.player << " = " << csv::num(c.mean) << " +- " << csv::num(c.std_error) << '\n';
  }
  write_text(out_path(cfg, "summary.txt"), os.str());
  std::cout << os.str();
  return kOk;
}

int cmd_verify(const RunConfig& cfg) {
  const Loaded l = load(cfg);
  if (reject_invalid(l)) return kValidation;
  fs::create_directories(cfg.output_dir);
  const auto law = verify::solve_law(l.spec, cfg.sabotage);

  std::vector<verify::CheckResult> checks;
  checks.push_back(verify::residual_order(l.spec));
  checks.push_back(verify::measurability(*law, cfg.seed, 20));
  OracleReport oracle;
  checks.push_back(
      verify::tower(*law, cfg.oracle_outer, cfg.oracle_inner, cfg.seed, cfg.threads, &oracle));
  std::vector<PerturbationReport> perturbations;
  for (int player = 1; player <= 3; ++player) {
    checks.push_back(verify::variational(*law, player, cfg.epsilons, cfg.n_paths, cfg.seed,
                                         cfg.threads, &perturbations));
  }
  std::vector<DpCrosscheck> dp;
  if (verify::reducible(l.spec)) checks.push_back(verify::dp_crosscheck(l.spec, &dp));

  csv::to_file(out_path(cfg, "perturbations.csv"),
               [&](std::ostream& os) { csv::write_perturbations(os, perturbations); });
  csv::to_file(out_path(cfg, "oracle.csv"), [&](std::ostream& os) { csv::write_oracle(os, oracle); });
  if (!dp.empty()) {
    csv::to_file(out_path(cfg, "dp.csv"), [&](std::ostream& os) { csv::write_dp(os, dp); });
  }

  nlohmann::ordered_json doc;
  doc["spec"] = cfg.spec_path;
  doc["seed"] = cfg.seed;
  doc["n_paths"] = cfg.n_paths;
  doc["steps"] = law->grid().steps();
  bool all = true;
  std::vector<std::string> failing;
  std::ostringstream summary;
  for (const auto& c : checks) {
    doc["checks"].push_back({{"id", c.id}, {"passed", c.passed}, {"detail", c.detail}});
    summary << (c.passed ? "PASS " : "FAIL ") << c.id << ": " << c.detail << '\n';
    if (!c.passed) {
      all = false;
      failing.push_back(c.id);
    }
  }
  doc["passed"] = all;
  doc["failing"] = failing;
  write_text(out_path(cfg, "verify_report.json"), doc.dump(2) + "\n");
  write_text(out_path(cfg, "summary.txt"), summary.str());
  std::cout << summary.str();
  if (!all) {
    std::cerr << "verification failed:";
    for (const auto& id : failing) std::cerr << ' ' << id;
    std::cerr << '\n';
    return kVerification;
  }
  return kOk;
}

int execute(const RunConfig& cfg) {
  try {
    if (cfg.command == "validate") return cmd_validate(cfg);
    if (cfg.command == "solve") return cmd_solve(cfg);
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
    std::cerr << "unknown command " << cfg.command << '\n';
    return kParse;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const BlowUpError& e) {
    std::cerr << "numerical blow-up: " << e.what() << '\n';
    return kBlowUp;
  } catch (const ConsistencyError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kBlowUp;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
}

int run(int argc, char** argv) {
  configure_logging_from_env();
  CLI::App app{"Three-level stochastic LQ Stackelberg game solver and verifier"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::size_t steps = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--spec", cfg.spec_path, "Game spec (JSON)")->required();
    sub->add_option("--out", cfg.output_dir, "Output directory");
  };
  auto add_numeric = [&](CLI::App* sub) {
    sub->add_option("--steps", steps, "Override the number of grid steps");
    sub->add_option("--seed", cfg.seed, "Base noise seed");
    sub->add_option("--paths", cfg.n_paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
    sub->add_option("--threads", cfg.threads, "Worker cap (results do not depend on it)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--sabotage", cfg.sabotage, "Scale feedback gains (test hook)")->group("");
  };

  CLI::App* validate = app.add_subcommand("validate", "Check a spec");
  add_common(validate);
  validate->add_option("--steps", steps, "Override the number of grid steps");

  CLI::App* solve = app.add_subcommand("solve", "Solve Riccati and offset equations");
  add_common(solve);
  solve->add_option("--steps", steps, "Override the number of grid steps");
  solve->add_option("--sabotage", cfg.sabotage, "Scale feedback gains (test hook)")->group("");

  CLI::App* simulate = app.add_subcommand("simulate", "Simulate equilibrium paths and costs");
  add_common(simulate);
  add_numeric(simulate);
  simulate->add_option("--dump-paths", cfg.dump_paths, "Paths written to paths.csv");
  simulate->add_option("--thin", cfg.thin, "Write every k-th node to paths.csv")
      ->check(CLI::PositiveNumber);

  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the verification suite");
  add_common(verify_cmd);
  add_numeric(verify_cmd);
  verify_cmd->add_option("--epsilons", cfg.epsilons, "Perturbation sizes")->delimiter(',');
  verify_cmd->add_option("--oracle-outer", cfg.oracle_outer, "Outer draws of the filter oracle");
  verify_cmd->add_option("--oracle-inner", cfg.oracle_inner, "Inner draws of the filter oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (steps > 0) cfg.steps = steps;
  return execute(cfg);
}

}  // namespace stacklq::cli
