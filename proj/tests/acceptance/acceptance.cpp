// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// Usage: stacklq_acceptance <data-dir> [scratch-dir]

#include "cli.hpp"
#include "verify.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace stacklq;

namespace {

fs::path g_data;
fs::path g_scratch;

GameSpec spec_file(const std::string& name) { return load_spec((g_data / name).string()); }

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

double max_abs(const MatrixTrajectory& m) { return m.max_abs(); }

// ------------------------------------------------------------------ criteria

Outcome closed_form() {
  const GameSpec s = verify::with_steps(spec_file("closed_form_scalar.json"), 1000);
  const MatrixTrajectory p = solve_p(s, s.solver_grid());
  const double err = std::abs(p.front()(0, 0) - 0.5);
  return {err <= 1e-8, "|p(0) - 0.5| = " + num(err)};
}

Outcome zero_suite() {
  const GameSpec s = spec_file("zero_costs.json");
  auto bundle = std::make_shared<const RiccatiBundle>(solve_riccati(s));
  auto offsets = std::make_shared<const OffsetBundle>(solve_offsets(*bundle));
  const auto law = std::make_shared<const FeedbackLaw>(bundle, offsets);
  double worst = std::max({max_abs(bundle->p), max_abs(bundle->P1), max_abs(bundle->P2),
                           max_abs(bundle->Pf1), max_abs(bundle->Pf2), max_abs(bundle->Pf3),
                           max_abs(offsets->Omega)});
  for (int player = 1; player <= 3; ++player) {
    for (std::size_t k = 0; k <= law->grid().steps(); ++k) {
      const ControlGain& g = law->node_gain(player, k);
      worst = std::max({worst, g.K.cwiseAbs().maxCoeff(), g.Khat.cwiseAbs().maxCoeff(),
                        g.Kcheck.cwiseAbs().maxCoeff(), g.k.cwiseAbs().maxCoeff()});
    }
  }
  const PathBundle paths = simulate_equilibrium(*law, NoiseSource(7), 50);
  for (int player = 1; player <= 3; ++player) {
    worst = std::max(worst, std::abs(estimate_cost(s, law->grid(), player, paths).mean));
  }
  return {worst <= 1e-12, "max |value| over Riccati, offsets, gains and costs = " + num(worst)};
}

Outcome convergence() {
  const GameSpec base = spec_file("generic_2d.json");
  const std::size_t coarse = 10;
  const std::size_t fine = 16 * 8 * coarse;
  const GameSpec rs = verify::with_steps(base, fine);
  const MatrixTrajectory ref = solve_p(rs, rs.solver_grid());
  double errs[4];
  for (int j = 0; j < 4; ++j) {
    const std::size_t steps = coarse << j;
    const GameSpec s = verify::with_steps(base, steps);
    const MatrixTrajectory p = solve_p(s, s.solver_grid());
    const std::size_t stride = fine / steps;
    double e = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) {
      e = std::max(e, (p.value(k) - ref.value(k * stride)).cwiseAbs().maxCoeff());
    }
    errs[j] = e;
  }
  Outcome o{true, "error ratios"};
  for (int j = 0; j < 3; ++j) {
    const double r = errs[j] / errs[j + 1];
    if (!(r >= 8.0 && r <= 32.0)) o.passed = false;
    o.detail += " " + num(r);
  }
  return o;
}

Outcome residual_checks() {
  Outcome o{true, ""};
  for (const char* name : {"generic_scalar.json", "generic_2d.json"}) {
    const GameSpec s = verify::with_steps(spec_file(name), 100);
    const verify::CheckResult r = verify::residual_order(s);
    o.passed = o.passed && r.passed;
    o.detail += std::string(name) + ": " + r.detail;
  }
  return o;
}

Outcome measurability() {
  const auto law = verify::solve_law(spec_file("generic_scalar.json"));
  const verify::CheckResult r = verify::measurability(*law, 42, 50);
  return {r.passed, r.detail};
}

Outcome tower() {
  const auto law = verify::solve_law(verify::with_steps(spec_file("generic_scalar.json"), 200));
  const verify::CheckResult r = verify::tower(*law, 20, 500, 42, 1);
  return {r.passed, r.detail};
}

Outcome ansatz() {
  const verify::CheckResult r =
      verify::ansatz(spec_file("variational_scalar.json"), 200, 100, 42, 1);
  return {r.passed, r.detail};
}

Outcome variational() {
  const GameSpec s = verify::with_steps(spec_file("variational_scalar.json"), 500);
  const auto eps = verify::default_epsilons();
  const std::size_t n_paths = 10000;
  const auto law = verify::solve_law(s);
  Outcome o{true, ""};
  for (int player = 1; player <= 3; ++player) {
    const verify::CheckResult r = verify::variational(*law, player, eps, n_paths, 42, 1);
    o.passed = o.passed && r.passed;
    o.detail += (r.passed ? "" : "[FAIL] ") + r.id + ": " + r.detail;
  }
  const auto sabotaged = verify::solve_law(s, 1.5);
  const verify::CheckResult nc = verify::negative_control(*sabotaged, eps, n_paths, 42, 1);
  o.passed = o.passed && nc.passed;
  o.detail += (nc.passed ? "" : "[FAIL] ") + nc.id + ": " + nc.detail;
  return o;
}

Outcome dp() {
  const verify::CheckResult r = verify::dp_crosscheck(spec_file("reducible_scalar.json"));
  return {r.passed, r.detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const char* files[] = {"costs.csv", "paths.csv", "summary.txt"};
  auto run = [&](unsigned threads, const std::string& tag) {
    cli::RunConfig cfg;
    cfg.command = "simulate";
    cfg.spec_path = (g_data / "generic_scalar.json").string();
    cfg.output_dir = (g_scratch / tag).string();
    cfg.n_paths = 2000;
    cfg.threads = threads;
    return cli::execute(cfg);
  };
  if (run(1, "det_a") != 0 || run(1, "det_b") != 0 || run(4, "det_c") != 0) {
    return {false, "cmd_simulate returned an error"};
  }
  for (const char* f : files) {
    const std::string a = slurp(g_scratch / "det_a" / f);
    if (a.empty()) return {false, std::string(f) + " is empty"};
    if (a != slurp(g_scratch / "det_b" / f)) return {false, std::string(f) + " differs on rerun"};
    if (a != slurp(g_scratch / "det_c" / f)) {
      return {false, std::string(f) + " differs with 4 threads"};
    }
  }
  return {true, "costs.csv, paths.csv, summary.txt identical across reruns and --threads 1/4"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: " << argv[0] << " <data-dir> [scratch-dir]\n";
    return 2;
  }
  g_data = argv[1];
  g_scratch = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "stacklq_acceptance";
  fs::create_directories(g_scratch);

  const Criterion criteria[] = {
      {1, "closed-form Riccati", 1.0, closed_form},
      {2, "zero suite", 1.0, zero_suite},
      {3, "convergence order", 10.0, convergence},
      {4, "residual order", 10.0, residual_checks},
      {5, "filter measurability", 5.0, measurability},
      {6, "tower oracle", 120.0, tower},
      {7, "ansatz residual", 30.0, ansatz},
      {8, "variational optimality", 300.0, variational},
      {9, "DP crosscheck", 30.0, dp},
      {10, "determinism", 10.0, determinism},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool ok = o.passed && in_time;
    if (!ok) ++failed;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << ") "
              << num(secs) << " s / " << c.budget_s << " s" << (in_time ? "" : " [over budget]")
              << ": " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
