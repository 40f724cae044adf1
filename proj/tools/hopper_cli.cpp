// hopper command-line front end.
//
// Subcommands:
//   simulate CONFIG [--controller raibert|bvp] [--seed N] [--out DIR]
//   compare  CONFIG [--seed N] [--out DIR]
//   solve-bvp NAME [--tol T] [--out DIR]
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime failure.
// Built entirely on the C API (hopper/capi.h).

#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "hopper/capi.h"

namespace {

struct SimDeleter {
  void operator()(hopper_sim* s) const { hopper_sim_destroy(s); }
};
struct ResultDeleter {
  void operator()(hopper_result* r) const { hopper_result_destroy(r); }
};
using SimPtr = std::unique_ptr<hopper_sim, SimDeleter>;
using ResultPtr = std::unique_ptr<hopper_result, ResultDeleter>;

int fail_config(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  return 1;
}

double metric(const hopper_result* r, const char* name) {
  double v = 0.0;
  hopper_result_metric(r, name, &v);
  return v;
}

SimPtr make_sim(const std::string& config_path, const std::string& controller,
                long long seed, bool has_seed) {
  SimPtr sim(hopper_sim_create(config_path.c_str()));
  if (!sim) return nullptr;
  if (!controller.empty() &&
      hopper_sim_set_controller(sim.get(), controller.c_str()) != HOPPER_OK) {
    return nullptr;
  }
  if (has_seed && hopper_sim_set_seed(sim.get(), static_cast<unsigned long long>(seed)) !=
                      HOPPER_OK) {
    return nullptr;
  }
  return sim;
}

int cmd_simulate(const std::string& config_path, const std::string& controller,
                 long long seed, bool has_seed, const std::string& out_dir) {
  SimPtr sim = make_sim(config_path, controller, seed, has_seed);
  if (!sim) return fail_config(hopper_last_error());
  ResultPtr res(hopper_sim_run(sim.get()));
  if (!res) return fail_config(hopper_last_error());
  if (hopper_result_write(res.get(), out_dir.c_str(), "") != HOPPER_OK) {
    std::fprintf(stderr, "error: %s\n", hopper_last_error());
    return 2;
  }
  std::printf("hops: %g\n", metric(res.get(), "hops"));
  std::printf("peak_stance_jerk: %g\n", metric(res.get(), "peak_stance_jerk"));
  std::printf("max_plan_bc_residual: %g\n", metric(res.get(), "max_plan_bc_residual"));
  std::printf("outputs: %s/trajectory.csv %s/events.csv %s/report.txt\n", out_dir.c_str(),
              out_dir.c_str(), out_dir.c_str());
  if (hopper_result_aborted(res.get())) {
    std::fprintf(stderr, "run aborted (partial logs retained)\n");
    return 2;
  }
  return 0;
}

int cmd_compare(const std::string& config_path, long long seed, bool has_seed,
                const std::string& out_dir) {
  // Independent seeds derived from the base seed by fixed offsets.
  const long long base = has_seed ? seed : 0;
  SimPtr pd_sim = make_sim(config_path, "raibert", base + 1, true);
  if (!pd_sim) return fail_config(hopper_last_error());
  SimPtr bvp_sim = make_sim(config_path, "bvp", base + 2, true);
  if (!bvp_sim) return fail_config(hopper_last_error());

  ResultPtr pd(hopper_sim_run(pd_sim.get()));
  if (!pd) return fail_config(hopper_last_error());
  ResultPtr bv(hopper_sim_run(bvp_sim.get()));
  if (!bv) return fail_config(hopper_last_error());

  if (hopper_result_write(pd.get(), out_dir.c_str(), "pd_") != HOPPER_OK ||
      hopper_result_write(bv.get(), out_dir.c_str(), "bvp_") != HOPPER_OK ||
      hopper_result_write_figures(pd.get(), out_dir.c_str(), 0) != HOPPER_OK ||
      hopper_result_write_figures(bv.get(), out_dir.c_str(), 1) != HOPPER_OK) {
    std::fprintf(stderr, "error: %s\n", hopper_last_error());
    return 2;
  }

  const double jerk_pd = metric(pd.get(), "peak_stance_jerk");
  const double jerk_bvp = metric(bv.get(), "peak_stance_jerk");
  const double ratio = jerk_bvp > 0 ? jerk_pd / jerk_bvp : 0.0;
  {
    std::ofstream os(out_dir + "/compare_report.txt");
    os << "peak_stance_jerk_pd: " << jerk_pd << "\n";
    os << "peak_stance_jerk_bvp: " << jerk_bvp << "\n";
    os << "jerk_ratio_pd_over_bvp: " << ratio << "\n";
    os << "peak_abs_tau_pd: " << metric(pd.get(), "peak_abs_tau") << "\n";
    os << "peak_abs_tau_bvp: " << metric(bv.get(), "peak_abs_tau") << "\n";
    os << "peak_abs_F_pd: " << metric(pd.get(), "peak_abs_F") << "\n";
    os << "peak_abs_F_bvp: " << metric(bv.get(), "peak_abs_F") << "\n";
    os << "control_effort_pd: " << metric(pd.get(), "control_effort") << "\n";
    os << "control_effort_bvp: " << metric(bv.get(), "control_effort") << "\n";
    os << "max_plan_bc_residual_bvp: " << metric(bv.get(), "max_plan_bc_residual") << "\n";
  }
  {
    // Data-only figures; this script is a convenience for gnuplot users.
    std::ofstream os(out_dir + "/plots.gp");
    os << "set datafile separator ','\n";
    os << "set key autotitle columnhead\n";
    os << "set terminal pngcairo size 1200,800\n";
    os << "set output 'fig_states.png'\n";
    os << "plot 'fig3_states.csv' using 1:2 with lines title 'pd l', \\\n";
    os << "     'fig3_states.csv' using 1:4 with lines title 'pd gamma', \\\n";
    os << "     'fig6_states.csv' using 1:2 with lines title 'bvp l', \\\n";
    os << "     'fig6_states.csv' using 1:4 with lines title 'bvp gamma'\n";
    os << "set output 'fig_torque.png'\n";
    os << "plot 'fig4_torque.csv' using 1:2 with lines, 'fig7_torque.csv' using 1:2 with lines\n";
    os << "set output 'fig_jerk.png'\n";
    os << "plot 'fig5_jerk.csv' using 1:2 with lines, 'fig8_jerk.csv' using 1:2 with lines\n";
  }
  std::printf("peak_stance_jerk_pd: %g\n", jerk_pd);
  std::printf("peak_stance_jerk_bvp: %g\n", jerk_bvp);
  std::printf("jerk_ratio_pd_over_bvp: %g\n", ratio);
  std::printf("outputs under %s\n", out_dir.c_str());
  if (hopper_result_aborted(pd.get()) || hopper_result_aborted(bv.get())) {
    std::fprintf(stderr, "a run aborted (partial logs retained)\n");
    return 2;
  }
  return 0;
}

int cmd_solve_bvp(const std::string& name, double tol, const std::string& out_dir) {
  double max_error = 0.0, max_defect = 0.0;
  int iterations = 0;
  const hopper_status st = hopper_solve_battery(name.c_str(), tol, out_dir.c_str(),
                                                &max_error, &max_defect, &iterations);
  if (st == HOPPER_ERR_ARG || st == HOPPER_ERR_CONFIG) {
    std::fprintf(stderr, "error: %s\nknown problems: %s\n", hopper_last_error(),
                 hopper_battery_names());
    return 1;
  }
  if (st != HOPPER_OK) {
    std::fprintf(stderr, "error: %s\n", hopper_last_error());
    return 2;
  }
  std::printf("problem: %s\n", name.c_str());
  std::printf("max_error_vs_analytic: %g\n", max_error);
  std::printf("max_defect: %g\n", max_defect);
  std::printf("newton_iterations: %d\n", iterations);
  std::printf("output: %s/%s.csv\n", out_dir.c_str(), name.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monopod hopper simulator and jerk-minimizing planner"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", controller;
  long long seed = 0;
  double tol = 1e-6;
  std::string problem;

  auto* simulate = app.add_subcommand("simulate", "Run one controller and emit CSV logs");
  simulate->add_option("config", config_path, "JSON config file")->required();
  simulate->add_option("--controller", controller, "raibert|bvp")
      ->check(CLI::IsMember({"raibert", "bvp"}));
  auto* seed_opt = simulate->add_option("--seed", seed, "RNG seed override");
  simulate->add_option("--out", out_dir, "output directory");

  auto* compare = app.add_subcommand("compare", "Run both controllers on one config");
  compare->add_option("config", config_path, "JSON config file")->required();
  auto* cseed_opt = compare->add_option("--seed", seed, "base RNG seed");
  compare->add_option("--out", out_dir, "output directory");

  auto* solve = app.add_subcommand("solve-bvp", "Solve a built-in analytic BVP");
  solve->add_option("problem", problem, "problem name")->required();
  solve->add_option("--tol", tol, "defect tolerance");
  solve->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) {
    return cmd_simulate(config_path, controller, seed, seed_opt->count() > 0, out_dir);
  }
  if (compare->parsed()) {
    return cmd_compare(config_path, seed, cseed_opt->count() > 0, out_dir);
  }
  return cmd_solve_bvp(problem, tol, out_dir);
}
