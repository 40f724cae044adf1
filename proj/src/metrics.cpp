#include "hopper/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace hopper::sim {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

RunReport summarize(const Trajectory& traj, Controller controller) {
  RunReport r;
  r.controller = controller_name(controller);
  r.hops = traj.hops_completed;
  r.aborted = traj.aborted;
  r.abort_reason = traj.abort_reason;
  if (!traj.records.empty()) {
    r.sim_time = traj.records.back().t - traj.records.front().t;
  }

  double sum_sq = 0.0;
  size_t n_stance = 0;
  for (size_t i = 0; i < traj.records.size(); ++i) {
    const Record& rec = traj.records[i];
    r.peak_abs_tau = std::max(r.peak_abs_tau, std::abs(rec.control.tau));
    r.peak_abs_F = std::max(r.peak_abs_F, std::abs(rec.control.F));
    r.control_effort +=
        (rec.control.F * rec.control.F + rec.control.tau * rec.control.tau) * traj.dt;
    if (rec.phase == Phase::Stance) {
      const double j = traj.jerk_gamma[i];
      r.peak_stance_jerk = std::max(r.peak_stance_jerk, std::abs(j));
      sum_sq += j * j;
      ++n_stance;
    }
  }
  if (n_stance > 0) r.rms_stance_jerk = std::sqrt(sum_sq / n_stance);

  // Apex height per flight arc.
  double apex = -1.0;
  bool in_flight = false;
  for (const Record& rec : traj.records) {
    if (rec.phase == Phase::Flight) {
      if (!in_flight) {
        in_flight = true;
        apex = rec.state.y_cm;
      } else {
        apex = std::max(apex, rec.state.y_cm);
      }
    } else if (in_flight) {
      r.apex_heights.push_back(apex);
      in_flight = false;
    }
  }
  if (in_flight) r.apex_heights.push_back(apex);

  if (traj.records.size() >= 2) {
    const double dx = traj.records.back().state.x_cm - traj.records.front().state.x_cm;
    r.mean_forward_speed = dx / r.sim_time;
  }
  r.plans = traj.plans;
  for (const PlanLog& pl : traj.plans) {
    r.max_plan_bc_residual = std::max(r.max_plan_bc_residual, pl.max_bc_residual);
    if (pl.phase == Phase::Stance) {
      // Transversality holds for the free-time stance plans only.
      r.max_abs_plan_hamiltonian_tf =
          std::max(r.max_abs_plan_hamiltonian_tf, std::abs(pl.hamiltonian_tf));
    }
  }
  return r;
}

double mean_forward_speed(const Trajectory& traj, int hop_begin, int hop_end) {
  std::vector<double> liftoffs;
  for (const Event& e : traj.events) {
    if (e.type == "liftoff") liftoffs.push_back(e.t);
  }
  if (hop_begin < 1 || hop_end <= hop_begin ||
      static_cast<size_t>(hop_end) > liftoffs.size()) {
    return 0.0;
  }
  const double t_a = liftoffs[hop_begin - 1];
  const double t_b = liftoffs[hop_end - 1];
  auto x_at = [&](double t) {
    // Records are uniform in t.
    const size_t i = std::min(
        traj.records.size() - 1,
        static_cast<size_t>(std::lround((t - traj.records.front().t) / traj.dt)));
    return traj.records[i].state.x_cm;
  };
  return (x_at(t_b) - x_at(t_a)) / (t_b - t_a);
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  os << "t,phase,l,l_dot,gamma,gamma_dot,psi,psi_dot,x_cm,y_cm,x_cm_dot,y_cm_dot,F,tau,"
        "jerk_gamma\n";
  for (size_t i = 0; i < traj.records.size(); ++i) {
    const Record& r = traj.records[i];
    const HopperState& s = r.state;
    os << g17(r.t) << ',' << phase_name(r.phase) << ',' << g17(s.l) << ',' << g17(s.l_dot)
       << ',' << g17(s.gamma) << ',' << g17(s.gamma_dot) << ',' << g17(s.psi) << ','
       << g17(s.psi_dot) << ',' << g17(s.x_cm) << ',' << g17(s.y_cm) << ','
       << g17(s.x_cm_dot) << ',' << g17(s.y_cm_dot) << ',' << g17(r.control.F) << ','
       << g17(r.control.tau) << ',' << g17(traj.jerk_gamma[i]) << '\n';
  }
}

void write_events_csv(const Trajectory& traj, std::ostream& os) {
  os << "t,event\n";
  for (const Event& e : traj.events) {
    os << g17(e.t) << ',' << e.type << '\n';
  }
}

void write_report(const RunReport& r, std::ostream& os) {
  os << "controller: " << r.controller << '\n';
  os << "hops: " << r.hops << '\n';
  os << "sim_time: " << g17(r.sim_time) << '\n';
  os << "aborted: " << (r.aborted ? "true" : "false") << '\n';
  if (r.aborted) os << "abort_reason: " << r.abort_reason << '\n';
  os << "peak_stance_jerk: " << g17(r.peak_stance_jerk) << '\n';
  os << "rms_stance_jerk: " << g17(r.rms_stance_jerk) << '\n';
  os << "peak_abs_tau: " << g17(r.peak_abs_tau) << '\n';
  os << "peak_abs_F: " << g17(r.peak_abs_F) << '\n';
  os << "control_effort: " << g17(r.control_effort) << '\n';
  os << "mean_forward_speed: " << g17(r.mean_forward_speed) << '\n';
  os << "max_plan_bc_residual: " << g17(r.max_plan_bc_residual) << '\n';
  os << "max_abs_plan_hamiltonian_tf: " << g17(r.max_abs_plan_hamiltonian_tf) << '\n';
  os << "apex_heights:";
  for (double a : r.apex_heights) os << ' ' << g17(a);
  os << '\n';
  for (size_t i = 0; i < r.plans.size(); ++i) {
    const PlanLog& pl = r.plans[i];
    os << "plan_" << i << ": " << phase_name(pl.phase) << " t_start=" << g17(pl.t_start)
       << " tf=" << g17(pl.tf) << " bc_residual=" << g17(pl.max_bc_residual)
       << " hamiltonian_tf=" << g17(pl.hamiltonian_tf) << '\n';
  }
}

void write_figures(const Trajectory& traj, const std::string& dir, const FigureSet& names) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream os(fs::path(dir) / names.states);
    os << "t,l,l_dot,gamma,gamma_dot,psi,psi_dot\n";
    for (const Record& r : traj.records) {
      os << g17(r.t) << ',' << g17(r.state.l) << ',' << g17(r.state.l_dot) << ','
         << g17(r.state.gamma) << ',' << g17(r.state.gamma_dot) << ',' << g17(r.state.psi)
         << ',' << g17(r.state.psi_dot) << '\n';
    }
  }
  // Torque and jerk over the last complete stance phase.
  size_t begin = 0, end = 0;
  {
    size_t seg_begin = 0;
    bool in_stance = false;
    for (size_t i = 0; i < traj.records.size(); ++i) {
      const bool stance = traj.records[i].phase == Phase::Stance;
      if (stance && !in_stance) {
        seg_begin = i;
        in_stance = true;
      } else if (!stance && in_stance) {
        begin = seg_begin;
        end = i;
        in_stance = false;
      }
    }
  }
  {
    std::ofstream os(fs::path(dir) / names.torque);
    os << "t,tau\n";
    for (size_t i = begin; i < end; ++i) {
      os << g17(traj.records[i].t) << ',' << g17(traj.records[i].control.tau) << '\n';
    }
  }
  {
    std::ofstream os(fs::path(dir) / names.jerk);
    os << "t,jerk_gamma\n";
    for (size_t i = begin; i < end; ++i) {
      os << g17(traj.records[i].t) << ',' << g17(traj.jerk_gamma[i]) << '\n';
    }
  }
}

}  // namespace hopper::sim
