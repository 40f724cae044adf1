#include "hopper/jerk_planner.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace hopper::plan {

namespace {

// BVP state layout: the flat chain states (grouped by derivative level)
// followed by their costates. w = -B'P/2 is substituted into both halves.
void indirect_rhs(const FlatLinearSystem& sys, std::span<const double> x,
                  std::span<double> dx) {
  const int d = sys.dim();
  const auto z = x.first(d);
  const auto P = x.subspan(d, d);
  std::vector<double> w(sys.n_outputs);
  sys.apply_Bt(P, w);
  for (double& wi : w) wi *= -0.5;

  std::vector<double> az(d), bw(d), atp(d);
  sys.apply_A(z, az);
  sys.apply_B(w, bw);
  sys.apply_At(P, atp);
  for (int i = 0; i < d; ++i) {
    dx[i] = az[i] + bw[i];
    dx[d + i] = -atp[i];
  }
}

double hamiltonian_of_state(const FlatLinearSystem& sys, std::span<const double> x,
                            double time_weight) {
  const int d = sys.dim();
  const auto z = x.first(d);
  const auto P = x.subspan(d, d);
  std::vector<double> w(sys.n_outputs);
  sys.apply_Bt(P, w);
  for (double& wi : w) wi *= -0.5;
  return time_weight + hamiltonian(z, P, w, sys);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

}  // namespace

double hamiltonian(std::span<const double> y, std::span<const double> P,
                   std::span<const double> w, const FlatLinearSystem& sys) {
  const int d = sys.dim();
  if (static_cast<int>(y.size()) != d || static_cast<int>(P.size()) != d ||
      static_cast<int>(w.size()) != sys.n_outputs) {
    raise(Errc::DimensionMismatch, "hamiltonian operand sizes");
  }
  std::vector<double> ay(d), bw(d);
  sys.apply_A(y, ay);
  sys.apply_B(w, bw);
  double h = 0.0;
  for (int j = 0; j < sys.n_outputs; ++j) h += w[j] * w[j];
  for (int i = 0; i < d; ++i) h += P[i] * (ay[i] + bw[i]);
  return h;
}

std::vector<double> optimal_jerk(std::span<const double> P, const FlatLinearSystem& sys) {
  if (static_cast<int>(P.size()) != sys.dim()) {
    raise(Errc::DimensionMismatch, "optimal_jerk costate size");
  }
  std::vector<double> w(sys.n_outputs);
  sys.apply_Bt(P, w);
  for (double& wi : w) wi *= -0.5;
  return w;
}

std::vector<double> costate_rhs(std::span<const double> P, const FlatLinearSystem& sys) {
  if (static_cast<int>(P.size()) != sys.dim()) {
    raise(Errc::DimensionMismatch, "costate_rhs costate size");
  }
  std::vector<double> dp(sys.dim());
  sys.apply_At(P, dp);
  for (double& v : dp) v = -v;
  return dp;
}

FlightTargets flight_targets(const HopperState& liftoff, const RaibertGains& gains,
                             const HopperParams& p, bool strict_paper_angle,
                             double touchdown_height) {
  if (!(liftoff.y_cm_dot > 0.0)) {
    raise(Errc::NonAscendingLiftoff, "liftoff requires ascending CM");
  }
  FlightTargets out;
  out.tf = 2.0 * liftoff.y_cm_dot / p.g;  // CM returns to the liftoff height
  double y_pred = liftoff.y_cm;
  if (std::isfinite(touchdown_height)) {
    const double disc = liftoff.y_cm_dot * liftoff.y_cm_dot +
                        2.0 * p.g * (liftoff.y_cm - touchdown_height);
    if (disc > 0.0) {
      out.tf = (liftoff.y_cm_dot + std::sqrt(disc)) / p.g;
      y_pred = touchdown_height;
    }
  }
  out.x_f = liftoff.x_cm_dot * out.tf / 2.0 +
            gains.G_gamma * (liftoff.x_cm_dot - gains.x_dot_d);
  if (strict_paper_angle) {
    out.gamma_d = std::atan(y_pred / out.x_f);
  } else {
    out.gamma_d = std::atan2(out.x_f, y_pred);
  }
  return out;
}

FlatChainState JerkPlan::flat_at(double t) const {
  std::vector<double> x(sol.dim);
  sol.dense_eval(t, x);
  FlatChainState f;
  if (phase == Phase::Flight) {
    f.y1 = l_rest;
    f.y1_dot = 0.0;
    f.y1_ddot = 0.0;
    f.y2 = x[0];
    f.y2_dot = x[1];
    f.y2_ddot = x[2];
  } else {
    f.y1 = x[0];
    f.y2 = x[1];
    f.y1_dot = x[2];
    f.y2_dot = x[3];
    f.y1_ddot = x[4];
    f.y2_ddot = x[5];
  }
  return f;
}

void JerkPlan::jerks_at(double t, double* w1, double* w2) const {
  std::vector<double> x(sol.dim);
  sol.dense_eval(t, x);
  const int d = sys.dim();
  std::vector<double> w(sys.n_outputs);
  sys.apply_Bt(std::span<const double>(x).subspan(d, d), w);
  if (phase == Phase::Flight) {
    if (w1) *w1 = 0.0;
    if (w2) *w2 = -0.5 * w[0];
  } else {
    if (w1) *w1 = -0.5 * w[0];
    if (w2) *w2 = -0.5 * w[1];
  }
}

CostateVector JerkPlan::costates_at(double t) const {
  std::vector<double> x(sol.dim);
  sol.dense_eval(t, x);
  const int d = sys.dim();
  CostateVector cv;
  cv.P.assign(x.begin() + d, x.end());
  return cv;
}

double JerkPlan::hamiltonian_at(double t) const {
  std::vector<double> x(sol.dim);
  sol.dense_eval(t, x);
  return hamiltonian_of_state(sys, x, time_weight);
}

JerkPlan plan_flight(double gamma0, double gamma_d, double tf, const PlannerOptions& opts) {
  if (!(tf > 0.0)) {
    raise(Errc::InvalidArgument, "plan_flight requires tf > 0");
  }
  JerkPlan plan;
  plan.phase = Phase::Flight;
  plan.sys = build_flat_system(1, 3);
  plan.tf = tf;
  plan.time_weight = 0.0;
  plan.gamma0 = gamma0;
  plan.gamma_f = gamma_d;
  plan.l_rest = opts.leg_length_ref;

  const FlatLinearSystem sys = plan.sys;
  bvp::BvpProblem prob;
  prob.dim = 6;
  prob.t0 = 0.0;
  prob.tf = tf;
  prob.rhs = [sys](double, std::span<const double> x, std::span<double> dx) {
    indirect_rhs(sys, x, dx);
  };
  prob.bc = [gamma0, gamma_d](std::span<const double> x0, std::span<const double> xf,
                              double, std::span<double> res) {
    res[0] = x0[0] - gamma0;
    res[1] = x0[1];
    res[2] = x0[2];
    res[3] = xf[0] - gamma_d;
    res[4] = xf[1];
    res[5] = xf[2];
  };
  prob.guess_times = linspace(0.0, tf, opts.guess_nodes);
  prob.guess_states.reserve(prob.guess_times.size());
  for (double t : prob.guess_times) {
    const double s = t / tf;
    prob.guess_states.push_back({gamma0 + (gamma_d - gamma0) * s, 0, 0, 0, 0, 0});
  }
  plan.sol = bvp::solve(prob, opts.bvp);
  plan.max_bc_residual = plan.sol.max_bc_residual;
  plan.hamiltonian_tf = plan.hamiltonian_at(tf);
  return plan;
}

JerkPlan plan_stance(double l0, double gamma0, double ldot0, double ldotf, double tf_guess,
                     const PlannerOptions& opts) {
  if (!(ldot0 < 0.0) || !(ldotf > 0.0)) {
    raise(Errc::SignConventionViolated,
          "stance requires ldot0 < 0 (landing) and ldotf > 0 (takeoff)");
  }
  if (!(l0 > 0.0)) {
    raise(Errc::NonPositiveLegLength, "plan_stance requires l0 > 0");
  }
  if (!(tf_guess > 0.0)) {
    raise(Errc::InvalidGuess, "plan_stance requires tf_guess > 0");
  }

  JerkPlan plan;
  plan.phase = Phase::Stance;
  plan.sys = build_flat_system(2, 3);
  plan.time_weight = opts.time_weight;
  plan.gamma0 = gamma0;
  plan.gamma_f = -gamma0;
  plan.l_rest = l0;
  plan.ldot0 = ldot0;
  plan.ldotf = ldotf;

  const FlatLinearSystem sys = plan.sys;
  const double rho = opts.time_weight;
  bvp::BvpProblem prob;
  prob.dim = 12;
  prob.t0 = 0.0;
  prob.free_tf = true;
  prob.tf_guess = tf_guess;
  prob.rhs = [sys](double, std::span<const double> x, std::span<double> dx) {
    indirect_rhs(sys, x, dx);
  };
  prob.bc = [sys, rho, l0, gamma0, ldot0, ldotf](std::span<const double> x0,
                                                 std::span<const double> xf, double,
                                                 std::span<double> res) {
    res[0] = x0[0] - l0;
    res[1] = x0[1] - gamma0;
    res[2] = x0[2] - ldot0;
    res[3] = x0[3];
    res[4] = x0[4];
    res[5] = x0[5];
    res[6] = xf[0] - l0;
    res[7] = xf[1] + gamma0;
    res[8] = xf[2] - ldotf;
    res[9] = xf[3];
    res[10] = xf[4];
    res[11] = xf[5];
    res[12] = hamiltonian_of_state(sys, xf, rho);  // free-tf transversality
  };
  // Stage 1: the fixed-time problem (the twelve state conditions alone) is
  // linear, so one Newton solve lands exactly on the extremal manifold for
  // tf_guess. Starting the free-time solve from zero costates instead makes
  // the first Newton step overshoot badly: the transversality condition is
  // quadratic in the costates and its gradient vanishes at P = 0.
  bvp::BvpProblem presolve;
  presolve.dim = 12;
  presolve.t0 = 0.0;
  presolve.tf = tf_guess;
  presolve.rhs = prob.rhs;
  presolve.bc = [l0, gamma0, ldot0, ldotf](std::span<const double> x0,
                                           std::span<const double> xf, double,
                                           std::span<double> res) {
    res[0] = x0[0] - l0;
    res[1] = x0[1] - gamma0;
    res[2] = x0[2] - ldot0;
    res[3] = x0[3];
    res[4] = x0[4];
    res[5] = x0[5];
    res[6] = xf[0] - l0;
    res[7] = xf[1] + gamma0;
    res[8] = xf[2] - ldotf;
    res[9] = xf[3];
    res[10] = xf[4];
    res[11] = xf[5];
  };
  presolve.guess_times = linspace(0.0, tf_guess, opts.guess_nodes);
  presolve.guess_states.reserve(presolve.guess_times.size());
  for (double t : presolve.guess_times) {
    const double s = t / tf_guess;
    std::vector<double> x(12, 0.0);
    x[0] = l0;
    x[1] = gamma0 + (-gamma0 - gamma0) * s;
    x[2] = ldot0 + (ldotf - ldot0) * s;
    presolve.guess_states.push_back(std::move(x));
  }
  try {
    const bvp::BvpSolution warm = bvp::solve(presolve, opts.bvp);
    prob.guess_times = warm.mesh;
    prob.guess_states = warm.states;
    plan.sol = bvp::solve(prob, opts.bvp);
  } catch (const Error& e) {
    if (e.code() == Errc::NoConvergence || e.code() == Errc::MeshLimitExceeded) {
      raise(Errc::PlanFailure, std::string("stance plan: ") + e.what());
    }
    throw;
  }
  plan.tf = plan.sol.tf;
  plan.max_bc_residual = plan.sol.max_bc_residual;
  plan.hamiltonian_tf = plan.hamiltonian_at(plan.tf);
  return plan;
}

ControlInput plan_to_controls(const JerkPlan& plan, double t, const HopperParams& p,
                              double l_measured, double ldot_measured,
                              const RaibertGains& gains, double slack) {
  double tc = t;
  if (tc > plan.tf) {
    if (tc - plan.tf > slack) {
      raise(Errc::OutOfDomain, "plan sampled past its horizon");
    }
    tc = plan.tf;
  } else if (tc < 0.0) {
    if (-tc > slack) {
      raise(Errc::OutOfDomain, "plan sampled before its start");
    }
    tc = 0.0;
  }
  const FlatChainState f = plan.flat_at(tc);
  ControlInput u;
  if (plan.phase == Phase::Stance) {
    const FlatControls c = stance_flat_to_controls(f, p);
    u.F = c.F;
    u.tau = c.tau;
  } else {
    // gamma_ddot = u2 / l^2 tracks y2_ddot exactly when scaled by measured l.
    u.tau = p.m * l_measured * l_measured * f.y2_ddot;
    u.F = -gains.k_p_leg * (l_measured - p.l0) - gains.k_v_leg * ldot_measured;
  }
  return u;
}

void write_plan_csv(const JerkPlan& plan, const HopperParams& p, std::ostream& os,
                    int samples) {
  os << "t,y1,y1_dot,y1_ddot,y2,y2_dot,y2_ddot,w1,w2,F,tau\n";
  char buf[420];
  for (int i = 0; i < samples; ++i) {
    const double t = plan.tf * i / (samples - 1);
    const FlatChainState f = plan.flat_at(t);
    double w1 = 0.0, w2 = 0.0;
    plan.jerks_at(t, &w1, &w2);
    const FlatControls c = plan.phase == Phase::Stance ? stance_flat_to_controls(f, p)
                                                       : flight_flat_to_controls(f, p);
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t,
                  f.y1, f.y1_dot, f.y1_ddot, f.y2, f.y2_dot, f.y2_ddot, w1, w2, c.F, c.tau);
    os << buf;
  }
}

}  // namespace hopper::plan
