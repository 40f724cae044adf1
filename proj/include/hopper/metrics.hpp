// Run summaries and CSV/report emission. Every report value is recomputable
// from the emitted CSVs; floats are printed with 17 significant digits so
// repeated runs compare byte-for-byte.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hopper/sim.hpp"

namespace hopper::sim {

struct RunReport {
  std::string controller;
  int hops = 0;
  double sim_time = 0.0;
  bool aborted = false;
  std::string abort_reason;
  double peak_stance_jerk = 0.0;  ///< max |jerk(gamma)| over stance samples
  double rms_stance_jerk = 0.0;
  double peak_abs_tau = 0.0;
  double peak_abs_F = 0.0;
  double control_effort = 0.0;  ///< integral of (F^2 + tau^2) dt
  double mean_forward_speed = 0.0;  ///< over the whole run
  double max_plan_bc_residual = 0.0;
  double max_abs_plan_hamiltonian_tf = 0.0;
  std::vector<double> apex_heights;  ///< per flight arc
  std::vector<PlanLog> plans;        ///< per-plan horizons and residuals
};

RunReport summarize(const Trajectory& traj, Controller controller);

/// Mean forward speed between liftoff events [hop_begin, hop_end]
/// (1-indexed liftoffs). Returns 0 when the range is not present.
double mean_forward_speed(const Trajectory& traj, int hop_begin, int hop_end);

/// t,phase,l,l_dot,gamma,gamma_dot,psi,psi_dot,x_cm,y_cm,x_cm_dot,y_cm_dot,F,tau,jerk_gamma
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

/// t,event
void write_events_csv(const Trajectory& traj, std::ostream& os);

/// key: value lines.
void write_report(const RunReport& report, std::ostream& os);

/// Figure data files: {prefix}states.csv over the whole run plus
/// {prefix}torque.csv and {prefix}jerk.csv restricted to the last complete
/// stance phase.
struct FigureSet {
  std::string states;  // e.g. "fig3_states.csv"
  std::string torque;
  std::string jerk;
};

void write_figures(const Trajectory& traj, const std::string& dir, const FigureSet& names);

/// Formats a double with 17 significant digits.
std::string g17(double v);

}  // namespace hopper::sim
