#include "hopper/model.hpp"

#include <cmath>

namespace hopper {

void HopperParams::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      raise(Errc::InvalidArgument, std::string(name) + " must be strictly positive");
    }
  };
  check(m, "m");
  check(m_b, "m_b");
  check(m_l, "m_l");
  check(k, "k");
  check(l0, "l0");
  check(I_b, "I_b");
  check(g, "g");
}

CmKinematics cm_kinematics(double l, double l_dot, double gamma, double gamma_dot) {
  const double s = std::sin(gamma);
  const double c = std::cos(gamma);
  CmKinematics out;
  out.x = -l * s;
  out.y = l * c;
  out.x_dot = -l_dot * s - l * gamma_dot * c;
  out.y_dot = l_dot * c - l * gamma_dot * s;
  return out;
}

StateDerivative stance_derivatives(const HopperState& s, const HopperParams& p,
                                   const ControlInput& u) {
  if (!(s.l > 0.0)) {
    raise(Errc::NonPositiveLegLength, "stance_derivatives requires l > 0");
  }
  const double u1 = u.F / p.m;
  const double u2 = u.tau / p.m;
  const double sg = std::sin(s.gamma);
  const double cg = std::cos(s.gamma);

  StateDerivative d;
  d.l_dot = s.l_dot;
  d.l_ddot = s.l * s.gamma_dot * s.gamma_dot - p.g * cg + u1;
  d.gamma_dot = s.gamma_dot;
  d.gamma_ddot = p.g * sg / s.l - 2.0 * s.l_dot * s.gamma_dot / s.l + u2 / (s.l * s.l);
  d.psi_dot = s.psi_dot;
  d.psi_ddot = p.alpha() * u2;

  // CM motion follows the polar map about the pinned foot.
  d.x_cm_dot = -s.l_dot * sg - s.l * s.gamma_dot * cg;
  d.y_cm_dot = s.l_dot * cg - s.l * s.gamma_dot * sg;
  d.x_cm_ddot = -d.l_ddot * sg - 2.0 * s.l_dot * s.gamma_dot * cg - s.l * d.gamma_ddot * cg +
                s.l * s.gamma_dot * s.gamma_dot * sg;
  d.y_cm_ddot = d.l_ddot * cg - 2.0 * s.l_dot * s.gamma_dot * sg - s.l * d.gamma_ddot * sg -
                s.l * s.gamma_dot * s.gamma_dot * cg;
  return d;
}

StateDerivative flight_derivatives(const HopperState& s, const HopperParams& p,
                                   const ControlInput& u) {
  if (!(s.l > 0.0)) {
    raise(Errc::NonPositiveLegLength, "flight_derivatives requires l > 0");
  }
  const double u1 = u.F / p.m;
  const double u2 = u.tau / p.m;

  StateDerivative d;
  d.l_dot = s.l_dot;
  d.l_ddot = u1;  // leg positioning only; the ballistic CM never sees F
  d.gamma_dot = s.gamma_dot;
  d.gamma_ddot = u2 / (s.l * s.l);
  d.psi_dot = s.psi_dot;
  d.psi_ddot = p.alpha() * u2;
  d.x_cm_dot = s.x_cm_dot;
  d.x_cm_ddot = 0.0;
  d.y_cm_dot = s.y_cm_dot;
  d.y_cm_ddot = -p.g;
  return d;
}

Slip1DofDerivative slip_1dof_derivatives(double y, double y_dot, const HopperParams& p) {
  Slip1DofDerivative d;
  d.y_dot = y_dot;
  if (y <= p.l0) {
    d.y_ddot = p.k * (p.l0 - y) / p.m - p.g;
  } else {
    d.y_ddot = -p.g;
  }
  return d;
}

double slip_2dof_gamma_accel(double l, double gamma, const HopperParams& p) {
  if (!(l > 0.0)) {
    raise(Errc::NonPositiveLegLength, "slip_2dof_gamma_accel requires l > 0");
  }
  return p.g * std::cos(gamma) / l;
}

double stance_energy(const HopperState& s, const HopperParams& p) {
  const double kin =
      0.5 * p.m * (s.l_dot * s.l_dot + s.l * s.l * s.gamma_dot * s.gamma_dot);
  const double pot = p.m * p.g * s.l * std::cos(s.gamma);
  const double spring = 0.5 * p.k * (p.l0 - s.l) * (p.l0 - s.l);
  return kin + pot + spring;
}

double flight_cm_energy(const HopperState& s, const HopperParams& p) {
  const double v2 = s.x_cm_dot * s.x_cm_dot + s.y_cm_dot * s.y_cm_dot;
  return 0.5 * p.m * v2 + p.m * p.g * s.y_cm;
}

}  // namespace hopper
