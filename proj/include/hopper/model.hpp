// Planar monopod hopper: physical parameters, state, and equations of motion.
//
// Conventions (see README): l is leg length, gamma the leg angle from
// vertical, psi the body pitch. In stance the foot is pinned at foot_x and
// the center of mass follows the polar map x_cm = foot_x - l*sin(gamma),
// y_cm = l*cos(gamma). In flight the CM is ballistic and the (massless) leg
// swings under the hip torque.
#pragma once

#include "hopper/errors.hpp"

namespace hopper {

enum class Phase { Stance, Flight };

inline const char* phase_name(Phase p) { return p == Phase::Stance ? "Stance" : "Flight"; }

/// Physical constants. All masses, lengths, stiffnesses strictly positive.
struct HopperParams {
  double m = 1.0;     ///< body mass [kg]
  double m_b = 1.0;   ///< first-order-model body mass [kg]
  double m_l = 0.1;   ///< first-order-model leg mass [kg]
  double k = 1000.0;  ///< leg spring stiffness [N/m]
  double l0 = 1.0;    ///< rest leg length [m]
  double I_b = 10.0;  ///< body inertia [kg m^2]
  double g = 9.81;    ///< gravitational acceleration [m/s^2]

  /// Body-angle control gain, psi_ddot = alpha * u2 with u2 = tau/m.
  double alpha() const { return m / I_b; }

  /// Throws InvalidArgument if any constant is non-positive.
  void validate() const;
};

struct HopperState {
  double l = 1.0;          ///< leg length [m]
  double l_dot = 0.0;      ///< leg rate [m/s]
  double gamma = 0.0;      ///< leg angle from vertical [rad]
  double gamma_dot = 0.0;  ///< [rad/s]
  double psi = 0.0;        ///< body angle [rad]
  double psi_dot = 0.0;    ///< [rad/s]
  double x_cm = 0.0;       ///< CM position [m]
  double y_cm = 1.0;
  double x_cm_dot = 0.0;  ///< CM velocity [m/s]
  double y_cm_dot = 0.0;
  double foot_x = 0.0;  ///< world foot anchor [m]
  Phase phase = Phase::Flight;
  double t = 0.0;  ///< time [s]
};

/// Axial leg force and hip torque. No magnitude bound is imposed.
struct ControlInput {
  double F = 0.0;    ///< [N]
  double tau = 0.0;  ///< [N m]
};

/// Time derivative of the dynamic fields of HopperState.
struct StateDerivative {
  double l_dot = 0.0;
  double l_ddot = 0.0;
  double gamma_dot = 0.0;
  double gamma_ddot = 0.0;
  double psi_dot = 0.0;
  double psi_ddot = 0.0;
  double x_cm_dot = 0.0;
  double x_cm_ddot = 0.0;
  double y_cm_dot = 0.0;
  double y_cm_ddot = 0.0;
};

struct CmKinematics {
  double x = 0.0;
  double y = 0.0;
  double x_dot = 0.0;
  double y_dot = 0.0;
};

/// Cartesian CM position and velocity in the stance frame anchored at the
/// foot: x = -l sin(gamma), y = l cos(gamma) and their derivatives.
CmKinematics cm_kinematics(double l, double l_dot, double gamma, double gamma_dot);

/// Stance dynamics:
///   l_ddot     = l*gamma_dot^2 - g*cos(gamma) + u1
///   gamma_ddot = g*sin(gamma)/l - 2*l_dot*gamma_dot/l + u2/l^2
///   psi_ddot   = alpha*u2
/// with u1 = F/m, u2 = tau/m. CM derivatives follow the polar map.
/// Throws NonPositiveLegLength when s.l <= 0.
StateDerivative stance_derivatives(const HopperState& s, const HopperParams& p,
                                   const ControlInput& u);

/// Flight dynamics: the CM is ballistic (x_cm_ddot = 0, y_cm_ddot = -g) and
/// is unaffected by F; the massless leg is positioned by the inputs,
///   l_ddot = u1, gamma_ddot = u2/l^2, psi_ddot = alpha*u2.
/// Throws NonPositiveLegLength when s.l <= 0.
StateDerivative flight_derivatives(const HopperState& s, const HopperParams& p,
                                   const ControlInput& u);

struct Slip1DofDerivative {
  double y_dot = 0.0;
  double y_ddot = 0.0;
};

/// 1-DOF SLIP: m*y_ddot = k(l0 - y) - m*g in stance (y <= l0), y_ddot = -g in
/// flight. The caller fixes the phase through y.
Slip1DofDerivative slip_1dof_derivatives(double y, double y_dot, const HopperParams& p);

/// 2-DOF SLIP angular acceleration, gamma_ddot = g*cos(gamma)/l.
/// Reference model reproduced verbatim; not used by the full hopper dynamics.
/// Throws NonPositiveLegLength when l <= 0.
double slip_2dof_gamma_accel(double l, double gamma, const HopperParams& p);

/// Stance mechanical energy m(l_dot^2 + l^2 gamma_dot^2)/2 + m g l cos(gamma)
/// + k(l0 - l)^2/2. Used by conservation checks.
double stance_energy(const HopperState& s, const HopperParams& p);

/// Ballistic CM energy m(v^2)/2 + m g y.
double flight_cm_energy(const HopperState& s, const HopperParams& p);

}  // namespace hopper
