// Three-part Raibert controller: hop height (stance thrust), forward speed
// (flight foot placement), and body attitude (stance PD), switched by phase.
#pragma once

#include "hopper/model.hpp"

namespace hopper {

struct RaibertGains {
  double k_xdot = 0.21;     ///< foot-placement speed gain [s]
  double G_gamma = 0.005;   ///< placement angle gain of the planned controller [s]
  double T_s = 0.12;        ///< nominal stance duration [s]
  double k_p = 2000.0;      ///< hip PD proportional gain (flight leg tracking)
  double k_v = 66.0;        ///< hip PD derivative gain
  double k_p_body = 150.0;  ///< body-attitude PD proportional gain (stance)
  double k_v_body = 77.5;   ///< body-attitude PD derivative gain
  double k_p_leg = 400.0;   ///< flight leg-length reset PD, proportional
  double k_v_leg = 40.0;    ///< flight leg-length reset PD, derivative
  double F_thrust = 0.3;    ///< stance thrust magnitude [N], active while extending
  double psi_d = 0.0;       ///< desired body angle [rad]
  double x_dot_d = 0.3;     ///< desired forward speed [m/s]

  /// Throws InvalidArgument on negative PD gains or non-positive T_s.
  void validate() const;
};

/// Neutral-point foot target plus speed correction:
///   x_d = x_dot*T_s/2 + k_xdot*(x_dot - x_dot_d).
double foot_placement(double x_dot, const RaibertGains& gains);

/// gamma_d = psi - asin(x_d / l). Throws FootTargetOutOfReach when |x_d| > l.
double desired_leg_angle(double x_d, double l, double psi);

/// tau = -k_p*(gamma - gamma_d) - k_v*gamma_dot.
double hip_pd(double gamma, double gamma_d, double gamma_dot, const RaibertGains& gains);

/// tau = -k_p_body*(psi - psi_d) - k_v_body*psi_dot.
double body_pd(double psi, double psi_d, double psi_dot, const RaibertGains& gains);

/// One controller evaluation on the (measured) state.
///
/// Flight: hip torque tracks the placement angle from foot_placement /
/// desired_leg_angle (the foot target is clamped to +-l here so the
/// controller always produces an output); F resets the leg toward l0 with
/// the leg PD. Stance: hip torque holds body attitude; F is the spring force
/// k(l0 - l) plus the thrust while the leg extends (l_dot > 0).
ControlInput raibert_step(const HopperState& s, const RaibertGains& gains,
                          const HopperParams& p);

}  // namespace hopper
