#include "hopper/flatness.hpp"

#include <cmath>

namespace hopper {

void FlatLinearSystem::apply_A(std::span<const double> x, std::span<double> out) const {
  const int d = dim();
  if (static_cast<int>(x.size()) != d || static_cast<int>(out.size()) != d) {
    raise(Errc::DimensionMismatch, "apply_A size");
  }
  for (int i = 0; i < d; ++i) {
    double acc = 0.0;
    for (int j = 0; j < d; ++j) acc += A[i * d + j] * x[j];
    out[i] = acc;
  }
}

void FlatLinearSystem::apply_At(std::span<const double> x, std::span<double> out) const {
  const int d = dim();
  if (static_cast<int>(x.size()) != d || static_cast<int>(out.size()) != d) {
    raise(Errc::DimensionMismatch, "apply_At size");
  }
  for (int j = 0; j < d; ++j) {
    double acc = 0.0;
    for (int i = 0; i < d; ++i) acc += A[i * d + j] * x[i];
    out[j] = acc;
  }
}

void FlatLinearSystem::apply_B(std::span<const double> u, std::span<double> out) const {
  const int d = dim();
  if (static_cast<int>(u.size()) != n_outputs || static_cast<int>(out.size()) != d) {
    raise(Errc::DimensionMismatch, "apply_B size");
  }
  for (int i = 0; i < d; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n_outputs; ++j) acc += B[i * n_outputs + j] * u[j];
    out[i] = acc;
  }
}

void FlatLinearSystem::apply_Bt(std::span<const double> x, std::span<double> out) const {
  const int d = dim();
  if (static_cast<int>(x.size()) != d || static_cast<int>(out.size()) != n_outputs) {
    raise(Errc::DimensionMismatch, "apply_Bt size");
  }
  for (int j = 0; j < n_outputs; ++j) {
    double acc = 0.0;
    for (int i = 0; i < d; ++i) acc += B[i * n_outputs + j] * x[i];
    out[j] = acc;
  }
}

FlatLinearSystem build_flat_system(int n_outputs, int order) {
  if ((n_outputs != 1 && n_outputs != 2) || (order != 2 && order != 3)) {
    raise(Errc::UnsupportedDimension, "n_outputs in {1,2}, order in {2,3}");
  }
  FlatLinearSystem sys;
  sys.n_outputs = n_outputs;
  sys.order = order;
  const int d = n_outputs * order;
  sys.A.assign(static_cast<size_t>(d) * d, 0.0);
  sys.B.assign(static_cast<size_t>(d) * n_outputs, 0.0);
  // States grouped by derivative level: level k of chain j sits at k*n + j.
  for (int level = 0; level + 1 < order; ++level) {
    for (int j = 0; j < n_outputs; ++j) {
      const int row = level * n_outputs + j;
      const int col = (level + 1) * n_outputs + j;
      sys.A[row * d + col] = 1.0;
    }
  }
  for (int j = 0; j < n_outputs; ++j) {
    const int row = (order - 1) * n_outputs + j;
    sys.B[row * n_outputs + j] = 1.0;
  }
  return sys;
}

FirstOrderInverse first_order_flat_inverse(const FlatChainState& f, const HopperParams& p) {
  const double sum = f.y1_dot + f.y2_dot;
  if (sum == 0.0) {
    raise(Errc::FlatSingularity, "y1_dot + y2_dot = 0");
  }
  const double sq = -p.m_b * f.y2_dot / (p.m_l * sum);
  if (!(sq > 0.0)) {
    raise(Errc::FlatSingularity, "(l + l0)^2 must be positive");
  }
  FirstOrderInverse out;
  out.gamma = M_PI / 2.0 - f.y1;
  out.psi = f.y2;
  out.tau = -f.y1_dot;
  const double lpl0 = std::sqrt(sq);
  out.l = lpl0 - p.l0;
  out.F = p.m_b * (f.y1_ddot * f.y2_dot - f.y1_dot * f.y2_ddot) /
          (2.0 * p.m_l * lpl0 * sum * sum);
  return out;
}

FlatControls stance_flat_to_controls(const FlatChainState& f, const HopperParams& p) {
  FlatControls c;
  c.u1 = f.y1_ddot - f.y1 * f.y2_dot * f.y2_dot + p.g * std::cos(f.y2);
  c.u2 = f.y1 * f.y1 * f.y2_ddot + 2.0 * f.y1 * f.y1_dot * f.y2_dot -
         p.g * f.y1 * std::sin(f.y2);
  c.F = p.m * c.u1;
  c.tau = p.m * c.u2;
  return c;
}

FlatControls flight_flat_to_controls(const FlatChainState& f, const HopperParams& p) {
  FlatControls c;
  c.u1 = 0.0;
  c.u2 = f.y1 * f.y1 * f.y2_ddot;
  c.F = 0.0;
  c.tau = p.m * c.u2;
  return c;
}

std::vector<double> recover_body_angle(std::span<const double> u2_series, double alpha,
                                       double psi0, double psi_dot0, double dt) {
  if (u2_series.size() < 2) {
    raise(Errc::EmptySeries, "need at least 2 samples");
  }
  if (!(dt > 0.0)) {
    raise(Errc::InvalidArgument, "dt must be positive");
  }
  const size_t n = u2_series.size();
  std::vector<double> psi_dot(n), psi(n);
  psi_dot[0] = psi_dot0;
  for (size_t i = 1; i < n; ++i) {
    psi_dot[i] = psi_dot[i - 1] + 0.5 * dt * alpha * (u2_series[i - 1] + u2_series[i]);
  }
  psi[0] = psi0;
  for (size_t i = 1; i < n; ++i) {
    psi[i] = psi[i - 1] + 0.5 * dt * (psi_dot[i - 1] + psi_dot[i]);
  }
  return psi;
}

}  // namespace hopper
