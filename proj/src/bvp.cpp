#include "hopper/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <limits>

namespace hopper::bvp {

namespace {

constexpr double kSqrtEps = 1.4901161193847656e-08;  // sqrt(DBL_EPSILON)

// Dense d x d LU with partial pivoting, row-major storage.
struct Lu {
  int d = 0;
  std::vector<double> a;
  std::vector<int> piv;

  // Returns false on a (numerically) singular matrix.
  bool factor(const std::vector<double>& m, int dim) {
    d = dim;
    a = m;
    piv.resize(d);
    for (int i = 0; i < d; ++i) piv[i] = i;
    for (int col = 0; col < d; ++col) {
      int p = col;
      double best = std::abs(a[col * d + col]);
      for (int r = col + 1; r < d; ++r) {
        const double v = std::abs(a[r * d + col]);
        if (v > best) {
          best = v;
          p = r;
        }
      }
      if (best < std::numeric_limits<double>::min() * 4) return false;
      if (p != col) {
        for (int j = 0; j < d; ++j) std::swap(a[col * d + j], a[p * d + j]);
        std::swap(piv[col], piv[p]);
      }
      const double pivot = a[col * d + col];
      for (int r = col + 1; r < d; ++r) {
        const double f = a[r * d + col] / pivot;
        a[r * d + col] = f;
        for (int j = col + 1; j < d; ++j) a[r * d + j] -= f * a[col * d + j];
      }
    }
    return true;
  }

  void solve(std::span<const double> b, std::span<double> x) const {
    std::vector<double> y(d);
    for (int i = 0; i < d; ++i) y[i] = b[piv[i]];
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < i; ++j) y[i] -= a[i * d + j] * y[j];
    }
    for (int i = d - 1; i >= 0; --i) {
      for (int j = i + 1; j < d; ++j) y[i] -= a[i * d + j] * y[j];
      x[i] = y[i] / a[i * d + i];
    }
  }

};

// Banded LU with partial pivoting, LAPACK-style storage: entry (i, j) lives
// at ab[ku + kl + i - j][j] for j - ku - kl <= i <= j + kl (the extra kl
// superdiagonals hold pivoting fill-in).
class BandLu {
 public:
  BandLu(int m, int kl, int ku)
      : m_(m), kl_(kl), ku_(ku), rows_(2 * kl + ku + 1),
        ab_(static_cast<size_t>(rows_) * m, 0.0), piv_(m) {}

  double& at(int i, int j) { return ab_[static_cast<size_t>(ku_ + kl_ + i - j) * m_ + j]; }

  bool factor() {
    for (int j = 0; j < m_; ++j) {
      const int i_max = std::min(m_ - 1, j + kl_);
      int p = j;
      double best = std::abs(at(j, j));
      for (int i = j + 1; i <= i_max; ++i) {
        const double v = std::abs(at(i, j));
        if (v > best) {
          best = v;
          p = i;
        }
      }
      if (best < std::numeric_limits<double>::min() * 4) return false;
      piv_[j] = p;
      const int j_max = std::min(m_ - 1, j + kl_ + ku_);
      if (p != j) {
        for (int c = j; c <= j_max; ++c) std::swap(at(j, c), at(p, c));
      }
      const double pivot = at(j, j);
      for (int i = j + 1; i <= i_max; ++i) {
        const double l = at(i, j) / pivot;
        at(i, j) = l;
        if (l == 0.0) continue;
        for (int c = j + 1; c <= j_max; ++c) at(i, c) -= l * at(j, c);
      }
    }
    return true;
  }

  void solve(std::vector<double>& b) const {
    for (int j = 0; j < m_; ++j) {
      if (piv_[j] != j) std::swap(b[j], b[piv_[j]]);
      const int i_max = std::min(m_ - 1, j + kl_);
      for (int i = j + 1; i <= i_max; ++i) {
        b[i] -= ab_[static_cast<size_t>(ku_ + kl_ + i - j) * m_ + j] * b[j];
      }
    }
    for (int i = m_ - 1; i >= 0; --i) {
      const int j_max = std::min(m_ - 1, i + kl_ + ku_);
      double acc = b[i];
      for (int j = i + 1; j <= j_max; ++j) {
        acc -= ab_[static_cast<size_t>(ku_ + kl_ + i - j) * m_ + j] * b[j];
      }
      b[i] = acc / ab_[static_cast<size_t>(ku_ + kl_) * m_ + i];
    }
  }

 private:
  int m_, kl_, ku_, rows_;
  std::vector<double> ab_;
  std::vector<int> piv_;
};

// Lobatto IIIa interval residual,
//   r = x1 - x0 - h/6 (f0 + 4 fm + f1),
// with the stage value xm taken from the cubic Hermite interpolant,
//   xm = (x0 + x1)/2 - h/8 (f1 - f0).
// Endpoint derivatives f0, f1 are supplied by the caller.
void interval_residual(const RhsFn& rhs, double t0, double h, std::span<const double> x0,
                       std::span<const double> x1, std::span<const double> f0,
                       std::span<const double> f1, std::span<double> res,
                       std::vector<double>& xm, std::vector<double>& fm) {
  const int d = static_cast<int>(x0.size());
  xm.resize(d);
  fm.resize(d);
  for (int i = 0; i < d; ++i) {
    xm[i] = 0.5 * (x0[i] + x1[i]) - h / 8.0 * (f1[i] - f0[i]);
  }
  rhs(t0 + 0.5 * h, xm, fm);
  for (int i = 0; i < d; ++i) {
    res[i] = x1[i] - x0[i] - h / 6.0 * (f0[i] + 4.0 * fm[i] + f1[i]);
  }
}

struct Mesh {
  std::vector<double> t;
  std::vector<std::vector<double>> x;  // node states
};

double residual_inf_norm(const std::vector<double>& r) {
  double m = 0.0;
  for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

// Full residual vector: (N-1)*d interval residuals followed by d boundary
// residuals. Assumes a fixed-time problem with n_bc == dim.
void full_residual(const BvpProblem& prob, const Mesh& mesh, std::vector<double>& out) {
  const int d = prob.dim;
  const size_t n = mesh.t.size();
  out.assign((n - 1) * d + d, 0.0);
  std::vector<std::vector<double>> f(n, std::vector<double>(d));
  for (size_t i = 0; i < n; ++i) prob.rhs(mesh.t[i], mesh.x[i], f[i]);
  std::vector<double> xm, fm;
  for (size_t i = 0; i + 1 < n; ++i) {
    const double h = mesh.t[i + 1] - mesh.t[i];
    interval_residual(prob.rhs, mesh.t[i], h, mesh.x[i], mesh.x[i + 1], f[i], f[i + 1],
                      std::span<double>(out.data() + i * d, d), xm, fm);
  }
  prob.bc(mesh.x.front(), mesh.x.back(), mesh.t.back(),
          std::span<double>(out.data() + (n - 1) * d, d));
}

// One damped Newton solve on a fixed mesh. Updates mesh.x in place and adds
// to *iterations. Throws NoConvergence.
//
// The linearized collocation system is almost block diagonal; with the
// boundary rows split by support (conditions on x(t0) on top, conditions on
// x(tf) at the bottom) it is banded with bandwidth 2*dim, and a banded LU
// with partial pivoting solves it stably. Boundary rows coupling both ends
// fall back to a dense solve on small meshes.
void newton_solve(const BvpProblem& prob, Mesh& mesh, const BvpOptions& opts,
                  int* iterations) {
  const int d = prob.dim;
  const size_t n = mesh.t.size();
  const size_t n_int = n - 1;

  // Residual rows are scaled per state component (the costates of these
  // problems can sit many orders of magnitude above the states); boundary
  // rows are taken as-is since bc_tol is an absolute contract.
  std::vector<double> comp_scale(d, 1.0);
  auto update_scales = [&] {
    for (int c = 0; c < d; ++c) comp_scale[c] = 1.0;
    for (const auto& xi : mesh.x) {
      for (int c = 0; c < d; ++c) comp_scale[c] = std::max(comp_scale[c], std::abs(xi[c]));
    }
  };
  auto scaled_norm = [&](const std::vector<double>& r) {
    double m = 0.0;
    for (size_t i = 0; i < n_int; ++i) {
      for (int c = 0; c < d; ++c) {
        m = std::max(m, std::abs(r[i * d + c]) / comp_scale[c]);
      }
    }
    for (size_t k = n_int * d; k < r.size(); ++k) m = std::max(m, std::abs(r[k]));
    return m;
  };

  std::vector<double> residual;
  full_residual(prob, mesh, residual);
  update_scales();
  double norm = scaled_norm(residual);

  std::vector<double> a_all(n_int * d * d), b_all(n_int * d * d);
  std::vector<double> base(d), pert(d), xm, fm;
  std::vector<double> f0(d), f1(d), f0p(d), f1p(d);

  for (int iter = 0; iter < opts.max_newton_iterations; ++iter) {
    if (norm <= opts.newton_tol) return;

    // Per-interval Jacobian blocks A_i = dr_i/dx_i, B_i = dr_i/dx_{i+1} by
    // forward differences.
    std::vector<double> r_all(n_int * d);
    for (size_t i = 0; i < n_int; ++i) {
      const double h = mesh.t[i + 1] - mesh.t[i];
      double* a_blk = a_all.data() + i * d * d;
      double* b_blk = b_all.data() + i * d * d;
      prob.rhs(mesh.t[i], mesh.x[i], f0);
      prob.rhs(mesh.t[i + 1], mesh.x[i + 1], f1);
      interval_residual(prob.rhs, mesh.t[i], h, mesh.x[i], mesh.x[i + 1], f0, f1, base, xm,
                        fm);
      for (int r = 0; r < d; ++r) r_all[i * d + r] = base[r];

      auto x_i = mesh.x[i];
      auto x_ip = mesh.x[i + 1];
      for (int j = 0; j < d; ++j) {
        const double dstep = kSqrtEps * (1.0 + std::abs(x_i[j]));
        x_i[j] += dstep;
        prob.rhs(mesh.t[i], x_i, f0p);
        interval_residual(prob.rhs, mesh.t[i], h, x_i, x_ip, f0p, f1, pert, xm, fm);
        x_i[j] = mesh.x[i][j];
        for (int r = 0; r < d; ++r) a_blk[r * d + j] = (pert[r] - base[r]) / dstep;
      }
      for (int j = 0; j < d; ++j) {
        const double dstep = kSqrtEps * (1.0 + std::abs(x_ip[j]));
        x_ip[j] += dstep;
        prob.rhs(mesh.t[i + 1], x_ip, f1p);
        interval_residual(prob.rhs, mesh.t[i], h, x_i, x_ip, f0, f1p, pert, xm, fm);
        x_ip[j] = mesh.x[i + 1][j];
        for (int r = 0; r < d; ++r) b_blk[r * d + j] = (pert[r] - base[r]) / dstep;
      }
    }

    // Boundary Jacobian blocks C0 = dbc/dx0, CN = dbc/dxf.
    std::vector<double> bc_base(d), bc_pert(d);
    prob.bc(mesh.x.front(), mesh.x.back(), mesh.t.back(), bc_base);
    std::vector<double> c0(static_cast<size_t>(d) * d), cn(static_cast<size_t>(d) * d);
    {
      auto x0 = mesh.x.front();
      for (int j = 0; j < d; ++j) {
        const double dstep = kSqrtEps * (1.0 + std::abs(x0[j]));
        x0[j] += dstep;
        prob.bc(x0, mesh.x.back(), mesh.t.back(), bc_pert);
        x0[j] = mesh.x.front()[j];
        for (int r = 0; r < d; ++r) c0[r * d + j] = (bc_pert[r] - bc_base[r]) / dstep;
      }
      auto xf = mesh.x.back();
      for (int j = 0; j < d; ++j) {
        const double dstep = kSqrtEps * (1.0 + std::abs(xf[j]));
        xf[j] += dstep;
        prob.bc(mesh.x.front(), xf, mesh.t.back(), bc_pert);
        xf[j] = mesh.x.back()[j];
        for (int r = 0; r < d; ++r) cn[r * d + j] = (bc_pert[r] - bc_base[r]) / dstep;
      }
    }

    // Split boundary rows by support. A row touching both ends makes the
    // system non-banded.
    std::vector<int> left_rows, right_rows;
    bool joint = false;
    for (int r = 0; r < d; ++r) {
      double c0n = 0, cnn = 0;
      for (int j = 0; j < d; ++j) {
        c0n = std::max(c0n, std::abs(c0[r * d + j]));
        cnn = std::max(cnn, std::abs(cn[r * d + j]));
      }
      if (cnn == 0.0) {
        left_rows.push_back(r);
      } else if (c0n == 0.0) {
        right_rows.push_back(r);
      } else {
        joint = true;
      }
    }

    const int m_total = static_cast<int>(n) * d;
    std::vector<double> delta_flat(m_total);

    if (!joint && n >= 2) {
      const int kl = 2 * d, ku = 2 * d;
      BandLu lu(m_total, kl, ku);
      std::vector<double> rhs(m_total, 0.0);
      const int n_left = static_cast<int>(left_rows.size());
      // Left boundary rows.
      for (int k = 0; k < n_left; ++k) {
        const int r = left_rows[k];
        for (int j = 0; j < d; ++j) lu.at(k, j) = c0[r * d + j];
        rhs[k] = -bc_base[r];
      }
      // Interval rows.
      for (size_t i = 0; i < n_int; ++i) {
        const double* a_blk = a_all.data() + i * d * d;
        const double* b_blk = b_all.data() + i * d * d;
        for (int r = 0; r < d; ++r) {
          const int g = n_left + static_cast<int>(i) * d + r;
          for (int j = 0; j < d; ++j) {
            lu.at(g, static_cast<int>(i) * d + j) = a_blk[r * d + j];
            lu.at(g, static_cast<int>(i + 1) * d + j) = b_blk[r * d + j];
          }
          rhs[g] = -r_all[i * d + r];
        }
      }
      // Right boundary rows.
      for (size_t k = 0; k < right_rows.size(); ++k) {
        const int r = right_rows[k];
        const int g = m_total - static_cast<int>(right_rows.size()) + static_cast<int>(k);
        for (int j = 0; j < d; ++j) {
          lu.at(g, (static_cast<int>(n) - 1) * d + j) = cn[r * d + j];
        }
        rhs[g] = -bc_base[r];
      }
      if (!lu.factor()) {
        raise(Errc::NoConvergence, "singular collocation Jacobian");
      }
      lu.solve(rhs);
      delta_flat = std::move(rhs);
    } else {
      // Dense fallback for boundary conditions that couple both endpoints.
      if (m_total > 1500) {
        raise(Errc::NoConvergence,
              "boundary conditions coupling both endpoints are only supported on "
              "small meshes");
      }
      std::vector<double> full(static_cast<size_t>(m_total) * m_total, 0.0);
      std::vector<double> rhs(m_total, 0.0);
      for (size_t i = 0; i < n_int; ++i) {
        const double* a_blk = a_all.data() + i * d * d;
        const double* b_blk = b_all.data() + i * d * d;
        for (int r = 0; r < d; ++r) {
          const int g = static_cast<int>(i) * d + r;
          for (int j = 0; j < d; ++j) {
            full[static_cast<size_t>(g) * m_total + i * d + j] = a_blk[r * d + j];
            full[static_cast<size_t>(g) * m_total + (i + 1) * d + j] = b_blk[r * d + j];
          }
          rhs[g] = -r_all[i * d + r];
        }
      }
      for (int r = 0; r < d; ++r) {
        const int g = static_cast<int>(n_int) * d + r;
        for (int j = 0; j < d; ++j) {
          full[static_cast<size_t>(g) * m_total + j] = c0[r * d + j];
          full[static_cast<size_t>(g) * m_total + (n - 1) * d + j] = cn[r * d + j];
        }
        rhs[g] = -bc_base[r];
      }
      Lu lu;
      if (!lu.factor(full, m_total)) {
        raise(Errc::NoConvergence, "singular collocation Jacobian");
      }
      std::vector<double> sol(m_total);
      lu.solve(rhs, sol);
      delta_flat = std::move(sol);
    }

    std::vector<std::vector<double>> delta(n, std::vector<double>(d));
    for (size_t i = 0; i < n; ++i) {
      for (int r = 0; r < d; ++r) delta[i][r] = delta_flat[i * d + r];
    }

    // Backtracking line search on the scaled residual norm.
    const auto x_old = mesh.x;
    double lambda = 1.0;
    bool accepted = false;
    double new_norm = 0.0;
    for (int halving = 0; halving <= 8; ++halving) {
      for (size_t i = 0; i < n; ++i) {
        for (int r = 0; r < d; ++r) mesh.x[i][r] = x_old[i][r] + lambda * delta[i][r];
      }
      full_residual(prob, mesh, residual);
      new_norm = scaled_norm(residual);
      if (std::isfinite(new_norm) && new_norm < (1.0 - 1e-4 * lambda) * norm) {
        norm = new_norm;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    update_scales();
    ++(*iterations);
    if (opts.trace) {
      std::fprintf(stderr, "  newton iter %d: |F|=%.3e lambda=%.4f accepted=%d\n", iter,
                   accepted ? norm : new_norm, lambda * (accepted ? 1.0 : 0.0), accepted);
    }
    if (!accepted) {
      mesh.x = x_old;
      if (norm <= opts.newton_accept_tol) return;  // stagnated at the numeric floor
      raise(Errc::NoConvergence, "Newton line search failed to reduce the residual");
    }
  }

  // Final check after the iteration budget.
  full_residual(prob, mesh, residual);
  if (scaled_norm(residual) > opts.newton_tol) {
    raise(Errc::NoConvergence, "Newton iteration limit reached");
  }
}

// Cubic Hermite evaluation on one interval; theta in [0, 1].
void hermite_eval(std::span<const double> x0, std::span<const double> f0,
                  std::span<const double> x1, std::span<const double> f1, double h,
                  double theta, std::span<double> out) {
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + theta;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = h00 * x0[i] + h10 * h * f0[i] + h01 * x1[i] + h11 * h * f1[i];
  }
}

void hermite_deriv(std::span<const double> x0, std::span<const double> f0,
                   std::span<const double> x1, std::span<const double> f1, double h,
                   double theta, std::span<double> out) {
  const double t2 = theta * theta;
  const double d00 = (6 * t2 - 6 * theta) / h;
  const double d10 = 3 * t2 - 4 * theta + 1;
  const double d01 = (-6 * t2 + 6 * theta) / h;
  const double d11 = 3 * t2 - 2 * theta;
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = d00 * x0[i] + d10 * f0[i] + d01 * x1[i] + d11 * f1[i];
  }
}

// Scaled defect estimate of the collocation polynomial on each interval,
// sampled at the half-interval midpoints (the collocation points themselves
// have zero defect by construction).
std::vector<double> estimate_defects(const BvpProblem& prob, const Mesh& mesh) {
  const int d = prob.dim;
  const size_t n = mesh.t.size();
  std::vector<std::vector<double>> f(n, std::vector<double>(d));
  for (size_t i = 0; i < n; ++i) prob.rhs(mesh.t[i], mesh.x[i], f[i]);

  std::vector<double> defects(n - 1, 0.0);
  std::vector<double> s(d), sp(d), fs(d);
  for (size_t i = 0; i + 1 < n; ++i) {
    const double h = mesh.t[i + 1] - mesh.t[i];
    double worst = 0.0;
    for (double theta : {0.25, 0.75}) {
      hermite_eval(mesh.x[i], f[i], mesh.x[i + 1], f[i + 1], h, theta, s);
      hermite_deriv(mesh.x[i], f[i], mesh.x[i + 1], f[i + 1], h, theta, sp);
      prob.rhs(mesh.t[i] + theta * h, s, fs);
      for (int c = 0; c < d; ++c) {
        const double rel = std::abs(sp[c] - fs[c]) / (1.0 + std::abs(fs[c]));
        worst = std::max(worst, rel);
      }
    }
    defects[i] = worst * h;
  }
  return defects;
}

Mesh initial_mesh(const BvpProblem& prob) {
  if (prob.guess_times.size() < 2 || prob.guess_times.size() != prob.guess_states.size()) {
    raise(Errc::InvalidGuess, "guess needs >= 2 nodes with matching states");
  }
  for (size_t i = 0; i + 1 < prob.guess_times.size(); ++i) {
    if (!(prob.guess_times[i] < prob.guess_times[i + 1])) {
      raise(Errc::InvalidGuess, "guess times must be strictly increasing");
    }
  }
  for (const auto& gs : prob.guess_states) {
    if (static_cast<int>(gs.size()) != prob.dim) {
      raise(Errc::InvalidGuess, "guess state dimension mismatch");
    }
  }
  // Rescale the guess abscissae onto [t0, tf].
  Mesh mesh;
  const double a = prob.guess_times.front();
  const double b = prob.guess_times.back();
  mesh.t.reserve(prob.guess_times.size());
  for (double gt : prob.guess_times) {
    const double s = (gt - a) / (b - a);
    mesh.t.push_back(prob.t0 + s * (prob.tf - prob.t0));
  }
  mesh.x = prob.guess_states;
  return mesh;
}

BvpSolution finalize_solution(const BvpProblem& prob, const Mesh& mesh, double max_defect,
                              int iterations) {
  BvpSolution sol;
  sol.dim = prob.dim;
  sol.mesh = mesh.t;
  sol.states = mesh.x;
  sol.derivs.assign(mesh.t.size(), std::vector<double>(prob.dim));
  for (size_t i = 0; i < mesh.t.size(); ++i) {
    prob.rhs(mesh.t[i], mesh.x[i], sol.derivs[i]);
  }
  sol.tf = mesh.t.back();
  sol.max_defect = max_defect;
  sol.newton_iterations = iterations;
  std::vector<double> bc_res(prob.dim);
  prob.bc(mesh.x.front(), mesh.x.back(), mesh.t.back(), bc_res);
  sol.max_bc_residual = residual_inf_norm(bc_res);
  return sol;
}

BvpSolution solve_fixed(const BvpProblem& prob, const BvpOptions& opts) {
  Mesh mesh = initial_mesh(prob);
  int iterations = 0;
  double max_defect = 0.0;

  for (int round = 0;; ++round) {
    newton_solve(prob, mesh, opts, &iterations);
    const auto defects = estimate_defects(prob, mesh);
    max_defect = *std::max_element(defects.begin(), defects.end());
    if (opts.trace) {
      std::fprintf(stderr, "refine round %d: nodes=%zu max_defect=%.3e\n", round,
                   mesh.t.size(), max_defect);
    }
    if (!opts.adaptive_mesh || max_defect <= opts.defect_tol) break;
    if (round >= 25) {
      raise(Errc::NoConvergence, "mesh refinement failed to reach the defect tolerance");
    }

    // Bisect offending intervals, interpolating the midpoint state from the
    // current collocation polynomial.
    Mesh refined;
    refined.t.reserve(mesh.t.size() * 2);
    refined.x.reserve(mesh.t.size() * 2);
    std::vector<std::vector<double>> f(mesh.t.size(), std::vector<double>(prob.dim));
    for (size_t i = 0; i < mesh.t.size(); ++i) prob.rhs(mesh.t[i], mesh.x[i], f[i]);
    for (size_t i = 0; i + 1 < mesh.t.size(); ++i) {
      refined.t.push_back(mesh.t[i]);
      refined.x.push_back(mesh.x[i]);
      if (defects[i] > opts.defect_tol) {
        const double h = mesh.t[i + 1] - mesh.t[i];
        std::vector<double> mid(prob.dim);
        hermite_eval(mesh.x[i], f[i], mesh.x[i + 1], f[i + 1], h, 0.5, mid);
        refined.t.push_back(mesh.t[i] + 0.5 * h);
        refined.x.push_back(std::move(mid));
      }
    }
    refined.t.push_back(mesh.t.back());
    refined.x.push_back(mesh.x.back());
    if (static_cast<int>(refined.t.size()) > opts.max_mesh_points) {
      raise(Errc::MeshLimitExceeded, "mesh exceeded max_mesh_points");
    }
    mesh = std::move(refined);
  }
  return finalize_solution(prob, mesh, max_defect, iterations);
}

}  // namespace

BvpProblem to_standard_form(const BvpProblem& problem) {
  if (!problem.free_tf) {
    return problem;
  }
  if (!(problem.tf_guess > problem.t0)) {
    raise(Errc::InvalidGuess, "tf_guess must exceed t0");
  }
  if (problem.guess_times.size() < 2) {
    raise(Errc::InvalidGuess, "guess needs >= 2 nodes");
  }
  const int d = problem.dim;
  const double t0 = problem.t0;

  BvpProblem std_form;
  std_form.dim = d + 1;
  std_form.t0 = 0.0;
  std_form.tf = 1.0;
  std_form.free_tf = false;

  RhsFn rhs = problem.rhs;
  std_form.rhs = [rhs, d, t0](double s, std::span<const double> x, std::span<double> dx) {
    const double span_t = x[d] - t0;
    const double t = t0 + s * span_t;
    rhs(t, x.first(d), dx.first(d));
    for (int i = 0; i < d; ++i) dx[i] *= span_t;
    dx[d] = 0.0;  // tf is constant
  };

  BcFn bc = problem.bc;
  // tf is read from the right endpoint so residuals that depend on it alone
  // stay right-separated (the appended state is constant along the mesh).
  std_form.bc = [bc, d](std::span<const double> x0, std::span<const double> xf,
                        double /*tf_scaled*/, std::span<double> res) {
    bc(x0.first(d), xf.first(d), xf[d], res);
  };

  std_form.guess_times.reserve(problem.guess_times.size());
  const double a = problem.guess_times.front();
  const double b = problem.guess_times.back();
  for (double gt : problem.guess_times) {
    std_form.guess_times.push_back((gt - a) / (b - a));
  }
  std_form.guess_states.reserve(problem.guess_states.size());
  for (const auto& gs : problem.guess_states) {
    auto augmented = gs;
    augmented.push_back(problem.tf_guess);
    std_form.guess_states.push_back(std::move(augmented));
  }
  return std_form;
}

BvpSolution solve(const BvpProblem& problem, const BvpOptions& opts) {
  if (problem.dim <= 0 || !problem.rhs || !problem.bc) {
    raise(Errc::InvalidArgument, "problem needs dim > 0, rhs, and bc");
  }
  if (!problem.free_tf) {
    if (!(problem.tf > problem.t0)) {
      raise(Errc::InvalidArgument, "tf must exceed t0");
    }
    return solve_fixed(problem, opts);
  }

  const BvpProblem std_form = to_standard_form(problem);
  BvpSolution scaled = solve_fixed(std_form, opts);

  // Map back: t = t0 + s*(tf - t0), drop the appended state.
  const int d = problem.dim;
  const double tf = scaled.states.front()[d];
  BvpSolution sol;
  sol.dim = d;
  sol.tf = tf;
  sol.max_defect = scaled.max_defect;
  sol.max_bc_residual = scaled.max_bc_residual;
  sol.newton_iterations = scaled.newton_iterations;
  const size_t n = scaled.mesh.size();
  sol.mesh.resize(n);
  sol.states.resize(n);
  sol.derivs.assign(n, std::vector<double>(d));
  for (size_t i = 0; i < n; ++i) {
    sol.mesh[i] = problem.t0 + scaled.mesh[i] * (tf - problem.t0);
    sol.states[i].assign(scaled.states[i].begin(), scaled.states[i].begin() + d);
    problem.rhs(sol.mesh[i], sol.states[i], sol.derivs[i]);
  }
  return sol;
}

void BvpSolution::dense_eval(double t, std::span<double> out) const {
  const double lo = mesh.front();
  const double hi = mesh.back();
  const double slack = 1e-12 * (1.0 + std::abs(hi - lo));
  if (t < lo - slack || t > hi + slack) {
    raise(Errc::OutOfDomain, "dense_eval outside the solution interval");
  }
  const double tc = std::clamp(t, lo, hi);
  auto it = std::upper_bound(mesh.begin(), mesh.end(), tc);
  size_t i = (it == mesh.begin()) ? 0 : static_cast<size_t>(it - mesh.begin()) - 1;
  if (i + 1 >= mesh.size()) i = mesh.size() - 2;
  const double h = mesh[i + 1] - mesh[i];
  const double theta = (tc - mesh[i]) / h;
  hermite_eval(states[i], derivs[i], states[i + 1], derivs[i + 1], h, theta, out);
}

std::vector<double> BvpSolution::dense_eval(double t) const {
  std::vector<double> out(dim);
  dense_eval(t, out);
  return out;
}

}  // namespace hopper::bvp
