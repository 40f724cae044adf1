// Hybrid simulation loop: fixed-step RK4, touchdown/liftoff event detection
// by bisection on the interpolated step, noise injection, and trajectory
// logging. Controllers are queried once per step on the measured state; the
// BVP controller replans exactly at phase changes.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hopper/jerk_planner.hpp"
#include "hopper/model.hpp"
#include "hopper/raibert.hpp"

namespace hopper::sim {

enum class Controller { Raibert, JerkBvp };

inline const char* controller_name(Controller c) {
  return c == Controller::Raibert ? "raibert" : "bvp";
}

/// Reference values shared by both controllers.
struct References {
  double apex_height = 1.4;  ///< desired CM apex height [m]
  double x_dot_d = 0.3;      ///< desired forward speed [m/s]
  double psi_d = 0.0;        ///< desired body angle [rad]
};

struct SimConfig {
  double dt = 1e-3;       ///< integrator step [s]
  double duration = 10.0; ///< wall of simulated time [s]
  int max_hops = 0;       ///< stop after this many liftoffs (0 = duration only)
  double sigma_process = 1e-3;
  double sigma_measurement = 1e-3;
  std::uint64_t seed = 0;
  Controller controller = Controller::Raibert;
  References refs;

  void validate() const;
};

struct Record {
  double t = 0.0;
  Phase phase = Phase::Flight;
  HopperState state;       // dynamics (un-measured) state
  ControlInput control;
  double gamma_ddot = 0.0; // from the phase EOM under the applied control
};

struct Event {
  double t = 0.0;
  std::string type;  // "touchdown" | "liftoff" | warnings
};

struct PlanLog {
  Phase phase = Phase::Flight;
  double t_start = 0.0;
  double tf = 0.0;
  double max_bc_residual = 0.0;
  double hamiltonian_tf = 0.0;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<Record> records;
  std::vector<Event> events;
  std::vector<PlanLog> plans;      // BVP controller only
  std::vector<double> jerk_gamma;  // central-difference jerk; endpoints zero
  int hops_completed = 0;
  bool aborted = false;
  std::string abort_reason;
};

/// Deterministic normal generator: mt19937_64 bits through Box-Muller, so
/// the stream is pinned by the standard rather than by the library's
/// normal_distribution.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : eng_(seed) {}
  double gaussian();

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

using OdeRhs = std::function<void(double t, std::span<const double> x, std::span<double> dx)>;

/// Classical RK4 step. Throws NonFiniteState if the result is not finite.
void rk4_step(const OdeRhs& rhs, double t, std::span<const double> x, double dt,
              std::span<double> out);

/// Touchdown guard: the foot height y_cm - l cos(gamma) crosses zero from
/// above while the CM descends. Both states must be Flight samples one step
/// apart. Returns the crossing time from bisection on the linearly
/// interpolated guard (|guard| <= 1e-10 at the returned time).
std::optional<double> detect_touchdown(const HopperState& s_prev, const HopperState& s_next);

/// Liftoff guard: l crosses l0 from below with l_dot > 0.
std::optional<double> detect_liftoff(const HopperState& s_prev, const HopperState& s_next,
                                     const HopperParams& p);

/// Measurement noise: additive sigma_measurement on every state fed to the
/// controller. Process noise: additive sigma_process*sqrt(dt) on velocity
/// states after each step (applied by the loop).
HopperState inject_measurement_noise(const HopperState& s, double sigma, NoiseStream& rng);

/// Second-order central difference (x[i+1]-x[i-1])/(2 dt); output length
/// n-2. Throws TooFewSamples for n < 3.
std::vector<double> central_diff_jerk(std::span<const double> gamma_ddot, double dt);

/// Touchdown reset: pins the foot under the current leg geometry and
/// re-derives (l_dot, gamma_dot) from the CM velocity.
HopperState touchdown_reset(const HopperState& s);

/// Liftoff reset: releases the foot; the CM velocity follows the polar map.
HopperState liftoff_reset(const HopperState& s);

/// Runs the hybrid simulation from the flight apex initial condition.
Trajectory run(const SimConfig& config, const HopperParams& p, const RaibertGains& gains,
               const plan::PlannerOptions& planner = {});

}  // namespace hopper::sim
