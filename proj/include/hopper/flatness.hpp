// Change of variables between physical coordinates and flat outputs.
//
// Second-order model: flat outputs y1 = l, y2 = gamma; the dynamics become a
// pair of integrator chains and the hip/body torques map back algebraically,
// except for psi which is recovered by double integration (Liouvillian part).
// The first-order model (y1 = pi/2 - gamma, y2 = psi) is retained as a
// validated reference only.
#pragma once

#include <span>
#include <vector>

#include "hopper/model.hpp"

namespace hopper {

/// Flat outputs and derivatives through second order. For the second-order
/// stance map y1 must stay positive (it equals l).
struct FlatChainState {
  double y1 = 0.0;
  double y1_dot = 0.0;
  double y1_ddot = 0.0;
  double y2 = 0.0;
  double y2_dot = 0.0;
  double y2_ddot = 0.0;
};

/// Normalized inputs u1 = F/m, u2 = tau/m alongside the physical F, tau.
struct FlatControls {
  double u1 = 0.0;
  double u2 = 0.0;
  double F = 0.0;
  double tau = 0.0;
};

struct FirstOrderInverse {
  double gamma = 0.0;
  double psi = 0.0;
  double tau = 0.0;
  double l = 0.0;
  double F = 0.0;
};

/// Integrator-chain system d/dt y = A y + B u for n_outputs chains of the
/// given order. States are grouped by derivative level, matching the
/// second-order two-output display: [y1, y2, y1', y2', ...]. A is nilpotent
/// of index `order`; B selects the top derivative of each chain.
struct FlatLinearSystem {
  int n_outputs = 0;
  int order = 0;
  std::vector<double> A;  ///< row-major dim x dim
  std::vector<double> B;  ///< row-major dim x n_outputs

  int dim() const { return n_outputs * order; }

  /// out = A x
  void apply_A(std::span<const double> x, std::span<double> out) const;
  /// out = A^T x
  void apply_At(std::span<const double> x, std::span<double> out) const;
  /// out = B u
  void apply_B(std::span<const double> u, std::span<double> out) const;
  /// out = B^T x
  void apply_Bt(std::span<const double> x, std::span<double> out) const;
};

/// Builds the chain system. n_outputs in {1, 2}, order in {2, 3};
/// throws UnsupportedDimension otherwise.
FlatLinearSystem build_flat_system(int n_outputs, int order);

/// First-order flat inverse (reference model):
///   gamma = pi/2 - y1, psi = y2, tau = -y1',
///   (l + l0)^2 = -m_b y2' / (m_l (y2' + y1')),
///   F = m_b (y1'' y2' - y1' y2'') / (2 m_l (l + l0) (y1' + y2')^2).
/// Throws FlatSingularity when y1' + y2' = 0 or the square is non-positive.
FirstOrderInverse first_order_flat_inverse(const FlatChainState& f, const HopperParams& p);

/// Stance map: u1 = y1'' - y1 y2'^2 + g cos(y2),
///             u2 = y1^2 y2'' + 2 y1 y1' y2' - g y1 sin(y2).
FlatControls stance_flat_to_controls(const FlatChainState& f, const HopperParams& p);

/// Flight map: u1 = 0, u2 = y1^2 y2''.
FlatControls flight_flat_to_controls(const FlatChainState& f, const HopperParams& p);

/// Recovers psi(t) from a uniformly sampled u2(t) by double trapezoidal
/// cumulative integration of psi_ddot = alpha*u2 with initial conditions
/// (psi0, psi_dot0). Throws EmptySeries when fewer than 2 samples.
std::vector<double> recover_body_angle(std::span<const double> u2_series, double alpha,
                                       double psi0, double psi_dot0, double dt);

}  // namespace hopper
