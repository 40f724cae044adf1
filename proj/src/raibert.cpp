#include "hopper/raibert.hpp"

#include <algorithm>
#include <cmath>

namespace hopper {

void RaibertGains::validate() const {
  if (k_p < 0 || k_v < 0 || k_p_body < 0 || k_v_body < 0 || k_p_leg < 0 || k_v_leg < 0) {
    raise(Errc::InvalidArgument, "PD gains must be non-negative");
  }
  if (!(T_s > 0)) {
    raise(Errc::InvalidArgument, "T_s must be strictly positive");
  }
}

double foot_placement(double x_dot, const RaibertGains& gains) {
  return x_dot * gains.T_s / 2.0 + gains.k_xdot * (x_dot - gains.x_dot_d);
}

double desired_leg_angle(double x_d, double l, double psi) {
  if (std::abs(x_d) > l) {
    raise(Errc::FootTargetOutOfReach, "|x_d| exceeds leg length");
  }
  return psi - std::asin(x_d / l);
}

double hip_pd(double gamma, double gamma_d, double gamma_dot, const RaibertGains& gains) {
  return -gains.k_p * (gamma - gamma_d) - gains.k_v * gamma_dot;
}

double body_pd(double psi, double psi_d, double psi_dot, const RaibertGains& gains) {
  return -gains.k_p_body * (psi - psi_d) - gains.k_v_body * psi_dot;
}

ControlInput raibert_step(const HopperState& s, const RaibertGains& gains,
                          const HopperParams& p) {
  ControlInput u;
  if (s.phase == Phase::Flight) {
    double x_d = foot_placement(s.x_cm_dot, gains);
    x_d = std::clamp(x_d, -s.l, s.l);
    // The CM map x = -l sin(gamma) puts the foot ahead of the CM for
    // positive gamma, so the placement target enters mirrored; feeding x_d
    // directly makes the speed feedback anti-stabilizing.
    const double gamma_d = desired_leg_angle(-x_d, s.l, s.psi);
    u.tau = hip_pd(s.gamma, gamma_d, s.gamma_dot, gains);
    u.F = -gains.k_p_leg * (s.l - p.l0) - gains.k_v_leg * s.l_dot;
  } else {
    u.tau = body_pd(s.psi, gains.psi_d, s.psi_dot, gains);
    u.F = p.k * (p.l0 - s.l);
    if (s.l_dot > 0.0) {
      u.F += gains.F_thrust;
    }
  }
  return u;
}

}  // namespace hopper
