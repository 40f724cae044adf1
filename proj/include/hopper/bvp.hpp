// Two-point boundary value problem solver.
//
// Three-stage Lobatto IIIa direct collocation on an adaptive mesh: piecewise
// cubic collocation polynomials, C1 across nodes, 4th order. The nonlinear
// collocation system is solved by damped Newton with finite-difference
// Jacobians; free end time is handled by the standard-form transformation
// (rescale to s in [0,1] and append tf as a constant state).
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hopper/errors.hpp"

namespace hopper::bvp {

/// ODE right-hand side: dx = f(t, x).
using RhsFn = std::function<void(double t, std::span<const double> x, std::span<double> dx)>;

/// Boundary residual r(x(t0), x(tf), tf). For fixed-time problems tf is the
/// problem's end time; for free-time problems it is the current iterate.
using BcFn = std::function<void(std::span<const double> x0, std::span<const double> xf,
                                double tf, std::span<double> res)>;

struct BvpProblem {
  int dim = 0;
  RhsFn rhs;
  BcFn bc;
  double t0 = 0.0;
  double tf = 1.0;        ///< fixed end time (ignored when free_tf)
  bool free_tf = false;
  double tf_guess = 1.0;  ///< end-time guess (free_tf only)
  std::vector<double> guess_times;               ///< strictly increasing, >= 2 nodes
  std::vector<std::vector<double>> guess_states; ///< one state vector per guess node

  /// Number of boundary residuals: dim, plus one when the end time is free.
  int n_bc() const { return dim + (free_tf ? 1 : 0); }
};

struct BvpOptions {
  double bc_tol = 1e-8;       ///< max |boundary residual| at the solution
  double defect_tol = 1e-6;   ///< max interval defect estimate
  double newton_tol = 1e-11;  ///< Newton residual infinity-norm target
  /// A stagnated line search still counts as converged below this norm
  /// (residual rows scale with the problem data, so the strict target can
  /// sit under the attainable floating-point floor).
  double newton_accept_tol = 1e-9;
  int max_newton_iterations = 50;
  int max_mesh_points = 2000;
  bool adaptive_mesh = true;  ///< bisect intervals whose defect exceeds defect_tol
  bool trace = false;         ///< print Newton/refinement progress to stderr
};

struct BvpSolution {
  int dim = 0;
  std::vector<double> mesh;                    ///< node times
  std::vector<std::vector<double>> states;     ///< x at nodes
  std::vector<std::vector<double>> derivs;     ///< f(t, x) at nodes
  double tf = 0.0;                             ///< resolved end time
  double max_defect = 0.0;
  double max_bc_residual = 0.0;
  int newton_iterations = 0;

  /// C1 piecewise-cubic dense output; exact at mesh nodes.
  /// Throws OutOfDomain outside [mesh.front(), mesh.back()].
  void dense_eval(double t, std::span<double> out) const;
  std::vector<double> dense_eval(double t) const;
};

/// Rewrites a free-end-time problem on the fixed interval [0, 1] with tf
/// appended as an extra state of zero derivative. Fixed-time problems pass
/// through unchanged. Throws InvalidGuess when tf_guess <= t0.
BvpProblem to_standard_form(const BvpProblem& problem);

/// Solves the BVP. Free-time problems are transformed internally and the
/// solution mapped back to physical time. Throws NoConvergence or
/// MeshLimitExceeded.
BvpSolution solve(const BvpProblem& problem, const BvpOptions& opts = {});

}  // namespace hopper::bvp
