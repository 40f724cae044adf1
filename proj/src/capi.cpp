#include "hopper/capi.h"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "hopper/battery.hpp"
#include "hopper/config.hpp"
#include "hopper/metrics.hpp"
#include "hopper/sim.hpp"

namespace {

thread_local std::string g_last_error = "";

void set_error(const std::string& msg) { g_last_error = msg; }

hopper_status status_of(const hopper::Error& e) {
  switch (e.code()) {
    case hopper::Errc::InvalidConfig:
      return HOPPER_ERR_CONFIG;
    case hopper::Errc::InvalidArgument:
      return HOPPER_ERR_ARG;
    default:
      return HOPPER_ERR_RUNTIME;
  }
}

}  // namespace

struct hopper_sim {
  hopper::Config config;
};

struct hopper_result {
  hopper::sim::Trajectory trajectory;
  hopper::sim::RunReport report;
  hopper::sim::Controller controller;
};

extern "C" {

const char* hopper_version(void) { return "0.1.0"; }

const char* hopper_last_error(void) { return g_last_error.c_str(); }

hopper_sim* hopper_sim_create(const char* config_path) {
  if (config_path == nullptr) {
    set_error("config_path is NULL");
    return nullptr;
  }
  try {
    auto* sim = new hopper_sim{hopper::load_config(config_path)};
    return sim;
  } catch (const hopper::Error& e) {
    set_error(e.what());
    return nullptr;
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

hopper_sim* hopper_sim_create_default(void) {
  return new hopper_sim{hopper::default_config()};
}

void hopper_sim_destroy(hopper_sim* sim) { delete sim; }

hopper_status hopper_sim_set_controller(hopper_sim* sim, const char* controller) {
  if (sim == nullptr || controller == nullptr) {
    set_error("NULL argument");
    return HOPPER_ERR_ARG;
  }
  if (std::strcmp(controller, "raibert") == 0) {
    sim->config.sim.controller = hopper::sim::Controller::Raibert;
  } else if (std::strcmp(controller, "bvp") == 0) {
    sim->config.sim.controller = hopper::sim::Controller::JerkBvp;
  } else {
    set_error(std::string("unknown controller '") + controller + "' (raibert|bvp)");
    return HOPPER_ERR_ARG;
  }
  return HOPPER_OK;
}

hopper_status hopper_sim_set_seed(hopper_sim* sim, unsigned long long seed) {
  if (sim == nullptr) {
    set_error("NULL sim");
    return HOPPER_ERR_ARG;
  }
  sim->config.sim.seed = seed;
  return HOPPER_OK;
}

hopper_status hopper_sim_set_noise(hopper_sim* sim, double sigma_process,
                                   double sigma_measurement) {
  if (sim == nullptr) {
    set_error("NULL sim");
    return HOPPER_ERR_ARG;
  }
  if (sigma_process < 0 || sigma_measurement < 0) {
    set_error("noise sigmas must be non-negative");
    return HOPPER_ERR_ARG;
  }
  sim->config.sim.sigma_process = sigma_process;
  sim->config.sim.sigma_measurement = sigma_measurement;
  return HOPPER_OK;
}

hopper_status hopper_sim_set_hops(hopper_sim* sim, int max_hops) {
  if (sim == nullptr || max_hops < 0) {
    set_error("NULL sim or negative hop count");
    return HOPPER_ERR_ARG;
  }
  sim->config.sim.max_hops = max_hops;
  return HOPPER_OK;
}

hopper_result* hopper_sim_run(hopper_sim* sim) {
  if (sim == nullptr) {
    set_error("NULL sim");
    return nullptr;
  }
  try {
    auto* res = new hopper_result;
    res->controller = sim->config.sim.controller;
    res->trajectory = hopper::sim::run(sim->config.sim, sim->config.params,
                                       sim->config.gains, sim->config.planner);
    res->report = hopper::sim::summarize(res->trajectory, res->controller);
    return res;
  } catch (const hopper::Error& e) {
    set_error(e.what());
    return nullptr;
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

void hopper_result_destroy(hopper_result* result) { delete result; }

int hopper_result_aborted(const hopper_result* result) {
  return (result != nullptr && result->trajectory.aborted) ? 1 : 0;
}

hopper_status hopper_result_metric(const hopper_result* result, const char* name,
                                   double* out) {
  if (result == nullptr || name == nullptr || out == nullptr) {
    set_error("NULL argument");
    return HOPPER_ERR_ARG;
  }
  const auto& r = result->report;
  const std::string n = name;
  if (n == "hops") {
    *out = r.hops;
  } else if (n == "sim_time") {
    *out = r.sim_time;
  } else if (n == "peak_stance_jerk") {
    *out = r.peak_stance_jerk;
  } else if (n == "rms_stance_jerk") {
    *out = r.rms_stance_jerk;
  } else if (n == "peak_abs_tau") {
    *out = r.peak_abs_tau;
  } else if (n == "peak_abs_F") {
    *out = r.peak_abs_F;
  } else if (n == "control_effort") {
    *out = r.control_effort;
  } else if (n == "mean_forward_speed") {
    *out = r.mean_forward_speed;
  } else if (n == "max_plan_bc_residual") {
    *out = r.max_plan_bc_residual;
  } else if (n == "max_abs_plan_hamiltonian_tf") {
    *out = r.max_abs_plan_hamiltonian_tf;
  } else if (n == "apex_mean") {
    double sum = 0;
    for (double a : r.apex_heights) sum += a;
    *out = r.apex_heights.empty() ? 0.0 : sum / r.apex_heights.size();
  } else if (n == "apex_last") {
    *out = r.apex_heights.empty() ? 0.0 : r.apex_heights.back();
  } else if (n.rfind("mean_forward_speed_hops_", 0) == 0) {
    int a = 0, b = 0;
    if (std::sscanf(name, "mean_forward_speed_hops_%d_%d", &a, &b) != 2) {
      set_error("bad hop-range metric name");
      return HOPPER_ERR_ARG;
    }
    *out = hopper::sim::mean_forward_speed(result->trajectory, a, b);
  } else {
    set_error("unknown metric '" + n + "'");
    return HOPPER_ERR_ARG;
  }
  return HOPPER_OK;
}

hopper_status hopper_result_write(const hopper_result* result, const char* out_dir,
                                  const char* prefix) {
  if (result == nullptr || out_dir == nullptr) {
    set_error("NULL argument");
    return HOPPER_ERR_ARG;
  }
  try {
    namespace fs = std::filesystem;
    const std::string pre = prefix == nullptr ? "" : prefix;
    fs::create_directories(out_dir);
    {
      std::ofstream os(fs::path(out_dir) / (pre + "trajectory.csv"));
      hopper::sim::write_trajectory_csv(result->trajectory, os);
    }
    {
      std::ofstream os(fs::path(out_dir) / (pre + "events.csv"));
      hopper::sim::write_events_csv(result->trajectory, os);
    }
    {
      std::ofstream os(fs::path(out_dir) / (pre + "report.txt"));
      hopper::sim::write_report(result->report, os);
    }
    return HOPPER_OK;
  } catch (const std::exception& e) {
    set_error(e.what());
    return HOPPER_ERR_RUNTIME;
  }
}

hopper_status hopper_result_write_figures(const hopper_result* result, const char* out_dir,
                                          int figure_set) {
  if (result == nullptr || out_dir == nullptr || (figure_set != 0 && figure_set != 1)) {
    set_error("bad argument (figure_set must be 0 or 1)");
    return HOPPER_ERR_ARG;
  }
  try {
    hopper::sim::FigureSet names;
    if (figure_set == 0) {
      names = {"fig3_states.csv", "fig4_torque.csv", "fig5_jerk.csv"};
    } else {
      names = {"fig6_states.csv", "fig7_torque.csv", "fig8_jerk.csv"};
    }
    hopper::sim::write_figures(result->trajectory, out_dir, names);
    return HOPPER_OK;
  } catch (const std::exception& e) {
    set_error(e.what());
    return HOPPER_ERR_RUNTIME;
  }
}

const char* hopper_battery_names(void) { return "line,cubic,sine,freetime"; }

hopper_status hopper_solve_battery(const char* name, double tol, const char* out_dir,
                                   double* max_error, double* max_defect, int* iterations) {
  if (name == nullptr) {
    set_error("NULL name");
    return HOPPER_ERR_ARG;
  }
  try {
    const auto result = hopper::battery::solve(name, tol > 0 ? tol : 1e-6);
    if (out_dir != nullptr) {
      namespace fs = std::filesystem;
      fs::create_directories(out_dir);
      std::ofstream os(fs::path(out_dir) / (result.name + ".csv"));
      hopper::battery::write_solution_csv(result, os);
    }
    if (max_error != nullptr) *max_error = result.max_error;
    if (max_defect != nullptr) *max_defect = result.solution.max_defect;
    if (iterations != nullptr) *iterations = result.solution.newton_iterations;
    return HOPPER_OK;
  } catch (const hopper::Error& e) {
    set_error(e.what());
    return status_of(e);
  } catch (const std::exception& e) {
    set_error(e.what());
    return HOPPER_ERR_RUNTIME;
  }
}

}  // extern "C"
