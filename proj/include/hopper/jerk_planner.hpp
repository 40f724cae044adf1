// Indirect jerk-minimizing trajectory generation.
//
// Both phases minimize the integrated squared jerk of the active flat
// outputs. Flight is a fixed-time rest-to-rest reorientation of y2 = gamma
// (3 states + 3 costates). Stance plans both chains with free end time
// (6 states + 6 costates, 13 boundary conditions including transversality).
//
// The pure jerk cost makes the free-time problem degenerate: the Hamiltonian
// of the quintic extremals is strictly negative and only approaches zero as
// tf grows without bound, so the printed transversality condition has no
// finite root. The stance cost therefore carries a constant time penalty
// (PlannerOptions::time_weight); the transversality condition becomes
// time_weight + w'w + P'(Ay + Bw) = 0 at tf, which selects a unique finite
// end time and leaves the costate dynamics, the optimal jerk law, and all
// twelve state boundary conditions unchanged.
#pragma once

#include <iosfwd>
#include <limits>

#include "hopper/bvp.hpp"
#include "hopper/flatness.hpp"
#include "hopper/model.hpp"
#include "hopper/raibert.hpp"

namespace hopper::plan {

/// Costates of the active flat chains: 3 per output (6 stance, 3 flight).
struct CostateVector {
  std::vector<double> P;
};

struct PlannerOptions {
  double time_weight = 2e5;      ///< stance running-cost time penalty
  double leg_length_ref = 1.0;   ///< l assumed by flight plans [m]
  bool strict_paper_angle = false;  ///< use atan(y/x_f) instead of atan2(x_f, y)
  int guess_nodes = 21;
  bvp::BvpOptions bvp{.bc_tol = 1e-11, .defect_tol = 1e-10, .max_mesh_points = 6000};
};

/// H = w'w + P'(A y + B w). Throws DimensionMismatch.
double hamiltonian(std::span<const double> y, std::span<const double> P,
                   std::span<const double> w, const FlatLinearSystem& sys);

/// Optimal jerk w = -B'P / 2.
std::vector<double> optimal_jerk(std::span<const double> P, const FlatLinearSystem& sys);

/// Costate dynamics P_dot = -A'P.
std::vector<double> costate_rhs(std::span<const double> P, const FlatLinearSystem& sys);

struct FlightTargets {
  double gamma_d = 0.0;  ///< leg angle for the next touchdown [rad]
  double tf = 0.0;       ///< flight duration from projectile motion [s]
  double x_f = 0.0;      ///< forward foot target [m]
};

/// Touchdown targets from a liftoff state: tf = 2*y_cm_dot/g (the CM returns
/// to the liftoff height), x_f = x_dot*tf/2 + G(x_dot - x_dot_d) with
/// G = gains.k_xdot, and gamma_d = atan2(x_f, y) with y the predicted CM
/// height at touchdown. Passing a finite touchdown_height replaces the
/// symmetric flight time with the positive root of the projectile equation
/// down to that height (falling back to the symmetric form when the apex
/// cannot reach it). Throws NonAscendingLiftoff when y_cm_dot <= 0.
FlightTargets flight_targets(const HopperState& liftoff, const RaibertGains& gains,
                             const HopperParams& p, bool strict_paper_angle = false,
                             double touchdown_height =
                                 std::numeric_limits<double>::quiet_NaN());

class JerkPlan {
 public:
  Phase phase = Phase::Flight;
  double tf = 0.0;             ///< plan horizon [s], local time starts at 0
  double time_weight = 0.0;    ///< stance time penalty (0 for flight)
  double max_bc_residual = 0.0;
  double hamiltonian_tf = 0.0;  ///< transversality Hamiltonian at tf
  // Boundary targets.
  double gamma0 = 0.0, gamma_f = 0.0;
  double l_rest = 1.0, ldot0 = 0.0, ldotf = 0.0;

  FlatLinearSystem sys;
  bvp::BvpSolution sol;

  /// Flat outputs through second derivative at local time t in [0, tf].
  FlatChainState flat_at(double t) const;
  /// Jerk inputs at t; w1 is identically zero for flight plans.
  void jerks_at(double t, double* w1, double* w2) const;
  /// Costates at t.
  CostateVector costates_at(double t) const;
  /// Transversality Hamiltonian (time_weight + w'w + P'(Ay+Bw)) at t.
  double hamiltonian_at(double t) const;
};

/// Minimum-jerk flight reorientation gamma0 -> gamma_d over [0, tf] with
/// rest-to-rest boundary conditions (velocity and acceleration zero at both
/// ends). w1 is structurally zero.
JerkPlan plan_flight(double gamma0, double gamma_d, double tf,
                     const PlannerOptions& opts = {});

/// Free-final-time stance plan: y1 runs l0 -> l0 with leg-rate endpoints
/// ldot0 < 0 (landing) and ldotf > 0 (takeoff), y2 runs gamma0 -> -gamma0
/// rest-to-rest. Throws SignConventionViolated on bad leg-rate signs.
JerkPlan plan_stance(double l0, double gamma0, double ldot0, double ldotf,
                     double tf_guess, const PlannerOptions& opts = {});

/// Samples the plan at local time t and maps to physical controls.
/// Stance: (F, tau) from the stance flat map. Flight: tau is scaled by the
/// measured leg length (tau = m l^2 y2''), and F comes from the leg-reset
/// loop (plans never command F in flight). Times past the horizon by less
/// than `slack` are clamped to the endpoint; beyond that throws OutOfDomain.
ControlInput plan_to_controls(const JerkPlan& plan, double t, const HopperParams& p,
                              double l_measured, double ldot_measured,
                              const RaibertGains& gains, double slack = 0.0);

/// Per-plan CSV: t,y1,y1_dot,y1_ddot,y2,y2_dot,y2_ddot,w1,w2,F,tau.
void write_plan_csv(const JerkPlan& plan, const HopperParams& p, std::ostream& os,
                    int samples = 401);

}  // namespace hopper::plan
