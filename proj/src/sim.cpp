#include "hopper/sim.hpp"

#include <algorithm>
#include <cmath>

namespace hopper::sim {

namespace {

constexpr int kStanceDim = 6;   // l, l_dot, gamma, gamma_dot, psi, psi_dot
constexpr int kFlightDim = 10;  // + x_cm, x_cm_dot, y_cm, y_cm_dot

void pack(const HopperState& s, std::span<double> x) {
  x[0] = s.l;
  x[1] = s.l_dot;
  x[2] = s.gamma;
  x[3] = s.gamma_dot;
  x[4] = s.psi;
  x[5] = s.psi_dot;
  if (s.phase == Phase::Flight) {
    x[6] = s.x_cm;
    x[7] = s.x_cm_dot;
    x[8] = s.y_cm;
    x[9] = s.y_cm_dot;
  }
}

HopperState unpack(std::span<const double> x, const HopperState& prototype) {
  HopperState s = prototype;
  s.l = x[0];
  s.l_dot = x[1];
  s.gamma = x[2];
  s.gamma_dot = x[3];
  s.psi = x[4];
  s.psi_dot = x[5];
  if (s.phase == Phase::Flight) {
    s.x_cm = x[6];
    s.x_cm_dot = x[7];
    s.y_cm = x[8];
    s.y_cm_dot = x[9];
  } else {
    const CmKinematics kin = cm_kinematics(s.l, s.l_dot, s.gamma, s.gamma_dot);
    s.x_cm = s.foot_x + kin.x;
    s.y_cm = kin.y;
    s.x_cm_dot = kin.x_dot;
    s.y_cm_dot = kin.y_dot;
  }
  return s;
}

double gamma_ddot_of(const HopperState& s, const HopperParams& p, const ControlInput& u) {
  const StateDerivative d =
      s.phase == Phase::Stance ? stance_derivatives(s, p, u) : flight_derivatives(s, p, u);
  return d.gamma_ddot;
}

// One RK4 step of the current phase under a frozen control input.
HopperState integrate_segment(const HopperState& s, const HopperParams& p,
                              const ControlInput& u, double h) {
  const int dim = s.phase == Phase::Stance ? kStanceDim : kFlightDim;
  std::vector<double> x(dim), out(dim);
  pack(s, x);
  OdeRhs rhs = [&s, &p, &u](double, std::span<const double> xv, std::span<double> dx) {
    const HopperState tmp = unpack(xv, s);
    const StateDerivative d = tmp.phase == Phase::Stance ? stance_derivatives(tmp, p, u)
                                                         : flight_derivatives(tmp, p, u);
    dx[0] = d.l_dot;
    dx[1] = d.l_ddot;
    dx[2] = d.gamma_dot;
    dx[3] = d.gamma_ddot;
    dx[4] = d.psi_dot;
    dx[5] = d.psi_ddot;
    if (tmp.phase == Phase::Flight) {
      dx[6] = d.x_cm_dot;
      dx[7] = d.x_cm_ddot;
      dx[8] = d.y_cm_dot;
      dx[9] = d.y_cm_ddot;
    }
  };
  rk4_step(rhs, s.t, x, h, out);
  HopperState next = unpack(out, s);
  next.t = s.t + h;
  return next;
}

// Bisection on the linearly interpolated guard between two samples.
double bisect_crossing(double t0, double g0, double t1, double g1) {
  double lo = 0.0, hi = 1.0, glo = g0;
  for (int it = 0; it < 128; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g0 + (g1 - g0) * mid;
    if (std::abs(gm) <= 1e-10) return t0 + (t1 - t0) * mid;
    if ((glo > 0) == (gm > 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return t0 + (t1 - t0) * 0.5 * (lo + hi);
}

struct BvpControllerCtx {
  std::optional<plan::JerkPlan> plan;
  double plan_t0 = 0.0;
  bool horizon_warned = false;
};

}  // namespace

void SimConfig::validate() const {
  if (!(dt > 0.0)) raise(Errc::InvalidArgument, "dt must be positive");
  if (sigma_process < 0.0 || sigma_measurement < 0.0) {
    raise(Errc::InvalidArgument, "noise sigmas must be non-negative");
  }
  if (!(duration > 0.0) && max_hops <= 0) {
    raise(Errc::InvalidArgument, "need a positive duration or hop count");
  }
}

double NoiseStream::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53;
  const double u2 = (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

void rk4_step(const OdeRhs& rhs, double t, std::span<const double> x, double dt,
              std::span<double> out) {
  if (!(dt > 0.0)) raise(Errc::InvalidArgument, "rk4_step requires dt > 0");
  const size_t n = x.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  rhs(t, x, k1);
  for (size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  rhs(t + 0.5 * dt, tmp, k2);
  for (size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  rhs(t + 0.5 * dt, tmp, k3);
  for (size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
  rhs(t + dt, tmp, k4);
  for (size_t i = 0; i < n; ++i) {
    out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!std::isfinite(out[i])) {
      raise(Errc::NonFiniteState, "state became non-finite during rk4_step");
    }
  }
}

std::optional<double> detect_touchdown(const HopperState& s_prev, const HopperState& s_next) {
  const double g0 = s_prev.y_cm - s_prev.l * std::cos(s_prev.gamma);
  const double g1 = s_next.y_cm - s_next.l * std::cos(s_next.gamma);
  if (!(g0 > 0.0) || !(g1 <= 0.0)) return std::nullopt;
  const double te = bisect_crossing(s_prev.t, g0, s_next.t, g1);
  const double theta = (te - s_prev.t) / (s_next.t - s_prev.t);
  const double ydot = s_prev.y_cm_dot + (s_next.y_cm_dot - s_prev.y_cm_dot) * theta;
  if (!(ydot < 0.0)) return std::nullopt;  // grazing ascent is not a touchdown
  return te;
}

std::optional<double> detect_liftoff(const HopperState& s_prev, const HopperState& s_next,
                                     const HopperParams& p) {
  const double g0 = s_prev.l - p.l0;
  const double g1 = s_next.l - p.l0;
  if (!(g0 < 0.0) || !(g1 >= 0.0)) return std::nullopt;
  const double te = bisect_crossing(s_prev.t, g0, s_next.t, g1);
  const double theta = (te - s_prev.t) / (s_next.t - s_prev.t);
  const double ldot = s_prev.l_dot + (s_next.l_dot - s_prev.l_dot) * theta;
  if (!(ldot > 0.0)) return std::nullopt;
  return te;
}

HopperState inject_measurement_noise(const HopperState& s, double sigma, NoiseStream& rng) {
  if (sigma == 0.0) return s;
  HopperState m = s;
  m.l += sigma * rng.gaussian();
  m.l_dot += sigma * rng.gaussian();
  m.gamma += sigma * rng.gaussian();
  m.gamma_dot += sigma * rng.gaussian();
  m.psi += sigma * rng.gaussian();
  m.psi_dot += sigma * rng.gaussian();
  m.x_cm += sigma * rng.gaussian();
  m.y_cm += sigma * rng.gaussian();
  m.x_cm_dot += sigma * rng.gaussian();
  m.y_cm_dot += sigma * rng.gaussian();
  return m;
}

std::vector<double> central_diff_jerk(std::span<const double> gamma_ddot, double dt) {
  if (gamma_ddot.size() < 3) {
    raise(Errc::TooFewSamples, "central_diff_jerk needs at least 3 samples");
  }
  if (!(dt > 0.0)) raise(Errc::InvalidArgument, "dt must be positive");
  std::vector<double> jerk(gamma_ddot.size() - 2);
  for (size_t i = 1; i + 1 < gamma_ddot.size(); ++i) {
    jerk[i - 1] = (gamma_ddot[i + 1] - gamma_ddot[i - 1]) / (2.0 * dt);
  }
  return jerk;
}

HopperState touchdown_reset(const HopperState& s) {
  HopperState r = s;
  const double sg = std::sin(s.gamma);
  const double cg = std::cos(s.gamma);
  r.foot_x = s.x_cm + s.l * sg;
  // The foot pins: leg rates jump to match the CM velocity.
  r.l_dot = -s.x_cm_dot * sg + s.y_cm_dot * cg;
  r.gamma_dot = -(s.x_cm_dot * cg + s.y_cm_dot * sg) / s.l;
  r.phase = Phase::Stance;
  const CmKinematics kin = cm_kinematics(r.l, r.l_dot, r.gamma, r.gamma_dot);
  r.x_cm = r.foot_x + kin.x;
  r.y_cm = kin.y;
  r.x_cm_dot = kin.x_dot;
  r.y_cm_dot = kin.y_dot;
  return r;
}

HopperState liftoff_reset(const HopperState& s) {
  HopperState r = s;
  const CmKinematics kin = cm_kinematics(s.l, s.l_dot, s.gamma, s.gamma_dot);
  r.x_cm = s.foot_x + kin.x;
  r.y_cm = kin.y;
  r.x_cm_dot = kin.x_dot;  // CM velocity is continuous through liftoff
  r.y_cm_dot = kin.y_dot;
  r.phase = Phase::Flight;
  return r;
}

Trajectory run(const SimConfig& config, const HopperParams& p, const RaibertGains& gains_in,
               const plan::PlannerOptions& planner) {
  config.validate();
  p.validate();
  RaibertGains gains = gains_in;
  gains.validate();
  gains.psi_d = config.refs.psi_d;
  gains.x_dot_d = config.refs.x_dot_d;
  if (!(config.refs.apex_height > p.l0)) {
    raise(Errc::InvalidArgument, "apex_height must exceed the rest leg length");
  }

  Trajectory traj;
  traj.dt = config.dt;
  NoiseStream rng(config.seed);
  BvpControllerCtx bvp_ctx;

  HopperState state;
  state.l = p.l0;
  state.l_dot = 0.0;
  state.gamma = 0.0;
  state.gamma_dot = 0.0;
  state.psi = 0.0;
  state.psi_dot = 0.0;
  state.x_cm = 0.0;
  state.y_cm = config.refs.apex_height;
  state.x_cm_dot = 0.0;
  state.y_cm_dot = 0.0;
  state.foot_x = 0.0;
  state.phase = Phase::Flight;
  state.t = 0.0;

  auto plan_for_flight = [&](const HopperState& at, bool initial) {
    plan::JerkPlan fp;
    plan::PlannerOptions popts = planner;
    popts.leg_length_ref = p.l0;
    if (initial) {
      // From the apex: descend to the foot-strike height under gravity.
      double h_td = p.l0;
      double tf = 5.0 * config.dt;
      double gamma_d = 0.0;
      for (int pass = 0; pass < 3; ++pass) {
        const double drop = std::max(at.y_cm - h_td, 0.0);
        tf = std::max(std::sqrt(2.0 * drop / p.g), 5.0 * config.dt);
        const double x_f = at.x_cm_dot * tf / 2.0 +
                           gains.G_gamma * (at.x_cm_dot - gains.x_dot_d);
        gamma_d = popts.strict_paper_angle ? std::atan(h_td / x_f)
                                           : std::atan2(x_f, h_td);
        h_td = p.l0 * std::cos(gamma_d);
      }
      fp = plan::plan_flight(at.gamma, gamma_d, tf, popts);
    } else {
      // The flight horizon should end where the foot strikes, so the
      // touchdown height and placement angle are iterated to consistency.
      plan::FlightTargets tg;
      double h_td = at.y_cm;
      for (int pass = 0; pass < 3; ++pass) {
        tg = plan::flight_targets(at, gains, p, popts.strict_paper_angle, h_td);
        h_td = p.l0 * std::cos(tg.gamma_d);
      }
      const double tf = std::max(tg.tf, 5.0 * config.dt);
      fp = plan::plan_flight(at.gamma, tg.gamma_d, tf, popts);
    }
    bvp_ctx.plan = std::move(fp);
    bvp_ctx.plan_t0 = at.t;
    bvp_ctx.horizon_warned = false;
    traj.plans.push_back({Phase::Flight, at.t, bvp_ctx.plan->tf,
                          bvp_ctx.plan->max_bc_residual, bvp_ctx.plan->hamiltonian_tf});
  };

  auto plan_for_stance = [&](const HopperState& at) {
    plan::PlannerOptions popts = planner;
    popts.leg_length_ref = p.l0;
    const double gamma0 = at.gamma;
    const double ldot0 = std::min(at.l_dot, -0.05);
    // Leg extension rate at takeoff chosen so the next apex reaches the
    // reference height.
    const double cg = std::cos(gamma0);
    double ldotf = 0.5;
    const double rise = config.refs.apex_height - p.l0 * cg;
    if (rise > 0.0 && std::abs(cg) > 0.1) {
      ldotf = std::sqrt(2.0 * p.g * rise) / cg;
    }
    ldotf = std::clamp(ldotf, 0.05, 10.0);
    plan::JerkPlan sp =
        plan::plan_stance(p.l0, gamma0, ldot0, ldotf, gains.T_s, popts);
    bvp_ctx.plan = std::move(sp);
    bvp_ctx.plan_t0 = at.t;
    bvp_ctx.horizon_warned = false;
    traj.plans.push_back({Phase::Stance, at.t, bvp_ctx.plan->tf,
                          bvp_ctx.plan->max_bc_residual, bvp_ctx.plan->hamiltonian_tf});
  };

  auto control_for = [&](const HopperState& measured) -> ControlInput {
    if (config.controller == Controller::Raibert) {
      return raibert_step(measured, gains, p);
    }
    double tau_local = measured.t - bvp_ctx.plan_t0;
    if (tau_local > bvp_ctx.plan->tf) {
      if (!bvp_ctx.horizon_warned) {
        traj.events.push_back({measured.t, "plan_horizon_hold"});
        bvp_ctx.horizon_warned = true;
      }
      tau_local = bvp_ctx.plan->tf;
    }
    return plan::plan_to_controls(*bvp_ctx.plan, tau_local, p, measured.l, measured.l_dot,
                                  gains, config.dt);
  };

  const long n_steps = std::lround(config.duration / config.dt);
  try {
    if (config.controller == Controller::JerkBvp) {
      plan_for_flight(state, /*initial=*/true);
    }
    for (long step = 0;; ++step) {
      HopperState measured = inject_measurement_noise(state, config.sigma_measurement, rng);
      measured.phase = state.phase;
      ControlInput u = control_for(measured);

      traj.records.push_back(
          {state.t, state.phase, state, u, gamma_ddot_of(state, p, u)});

      if (step >= n_steps) break;
      if (config.max_hops > 0 && traj.hops_completed >= config.max_hops) break;

      HopperState next = integrate_segment(state, p, u, config.dt);

      std::optional<double> te;
      bool is_touchdown = false;
      if (state.phase == Phase::Flight) {
        te = detect_touchdown(state, next);
        is_touchdown = te.has_value();
      } else {
        te = detect_liftoff(state, next, p);
      }

      if (te) {
        const double h1 = *te - state.t;
        HopperState at_event = h1 > 1e-14 ? integrate_segment(state, p, u, h1) : state;
        at_event.t = *te;
        if (is_touchdown) {
          at_event = touchdown_reset(at_event);
          traj.events.push_back({*te, "touchdown"});
        } else {
          at_event = liftoff_reset(at_event);
          traj.events.push_back({*te, "liftoff"});
          ++traj.hops_completed;
        }
        if (config.controller == Controller::JerkBvp) {
          try {
            if (is_touchdown) {
              plan_for_stance(at_event);
            } else {
              plan_for_flight(at_event, /*initial=*/false);
            }
          } catch (const Error& e) {
            raise(Errc::PlanFailure, std::string(is_touchdown ? "touchdown" : "liftoff") +
                                         " replan at t=" + std::to_string(*te) + ": " +
                                         e.what());
          }
        }
        const double h2 = state.t + config.dt - *te;
        if (h2 > 1e-14) {
          HopperState m2 = inject_measurement_noise(at_event, config.sigma_measurement, rng);
          m2.phase = at_event.phase;
          const ControlInput u2 = control_for(m2);
          next = integrate_segment(at_event, p, u2, h2);
        } else {
          next = at_event;
        }
      }

      if (config.sigma_process > 0.0) {
        const double sp = config.sigma_process * std::sqrt(config.dt);
        next.l_dot += sp * rng.gaussian();
        next.gamma_dot += sp * rng.gaussian();
        next.psi_dot += sp * rng.gaussian();
        if (next.phase == Phase::Flight) {
          next.x_cm_dot += sp * rng.gaussian();
          next.y_cm_dot += sp * rng.gaussian();
        } else {
          const CmKinematics kin =
              cm_kinematics(next.l, next.l_dot, next.gamma, next.gamma_dot);
          next.x_cm_dot = kin.x_dot;
          next.y_cm_dot = kin.y_dot;
        }
      }
      state = next;
    }
  } catch (const Error& e) {
    traj.aborted = true;
    traj.abort_reason = e.what();
  }

  std::vector<double> gdd(traj.records.size());
  for (size_t i = 0; i < traj.records.size(); ++i) gdd[i] = traj.records[i].gamma_ddot;
  traj.jerk_gamma.assign(traj.records.size(), 0.0);
  if (gdd.size() >= 3) {
    const auto inner = central_diff_jerk(gdd, config.dt);
    for (size_t i = 0; i < inner.size(); ++i) traj.jerk_gamma[i + 1] = inner[i];
  }
  return traj;
}

}  // namespace hopper::sim
