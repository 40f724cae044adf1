#include <cmath>

#include "doctest.h"
#include "hopper/raibert.hpp"

using namespace hopper;

TEST_CASE("foot placement") {
  RaibertGains g;
  g.T_s = 0.5;
  g.k_xdot = 0.1;
  g.x_dot_d = 1.0;
  CHECK(foot_placement(1.0, g) == doctest::Approx(0.25));
  g.x_dot_d = 0.0;
  CHECK(foot_placement(0.0, g) == doctest::Approx(0.0));
  g.T_s = 0.4;
  g.x_dot_d = 1.0;
  CHECK(foot_placement(2.0, g) == doctest::Approx(0.5));
}

TEST_CASE("desired leg angle") {
  CHECK(desired_leg_angle(0.0, 1.0, 0.0) == doctest::Approx(0.0));
  CHECK(desired_leg_angle(1.0, 1.0, 0.0) == doctest::Approx(-M_PI / 2.0));
  CHECK(desired_leg_angle(0.5, 1.0, 0.1) == doctest::Approx(0.1 - std::asin(0.5)));
  CHECK_THROWS_AS(desired_leg_angle(1.2, 1.0, 0.0), Error);
}

TEST_CASE("PD laws") {
  RaibertGains g;
  g.k_p = 10.0;
  g.k_v = 2.0;
  g.k_p_body = 5.0;
  g.k_v_body = 1.0;
  CHECK(hip_pd(0.3, 0.3, 0.0, g) == doctest::Approx(0.0));
  CHECK(hip_pd(0.1, 0.0, 0.0, g) == doctest::Approx(-1.0));
  CHECK(hip_pd(0.0, 0.0, -0.5, g) == doctest::Approx(1.0));
  CHECK(body_pd(-0.2, 0.0, 0.0, g) == doctest::Approx(1.0));
  CHECK(body_pd(0.0, 0.0, 2.0, g) == doctest::Approx(-2.0));

  SUBCASE("linearity: doubling both errors doubles tau") {
    const double t1 = hip_pd(0.07, 0.0, -0.3, g);
    const double t2 = hip_pd(0.14, 0.0, -0.6, g);
    CHECK(t2 == doctest::Approx(2.0 * t1));
    const double b1 = body_pd(0.05, 0.0, 0.2, g);
    const double b2 = body_pd(0.10, 0.0, 0.4, g);
    CHECK(b2 == doctest::Approx(2.0 * b1));
  }
}

TEST_CASE("raibert_step state machine") {
  HopperParams p;
  RaibertGains g;

  SUBCASE("flight with all errors zero is quiescent") {
    HopperState s;
    s.phase = Phase::Flight;
    s.l = p.l0;
    s.l_dot = 0.0;
    s.x_cm_dot = 0.0;
    g.x_dot_d = 0.0;
    // gamma exactly at the placement target.
    const double x_d = foot_placement(0.0, g);
    s.gamma = desired_leg_angle(x_d, s.l, 0.0);
    s.gamma_dot = 0.0;
    auto u = raibert_step(s, g, p);
    CHECK(u.tau == doctest::Approx(0.0));
    CHECK(u.F == doctest::Approx(0.0));
  }

  SUBCASE("stance at rest length with settled body") {
    HopperState s;
    s.phase = Phase::Stance;
    s.l = p.l0;
    s.l_dot = -0.1;  // compressing: no thrust
    s.psi = g.psi_d;
    s.psi_dot = 0.0;
    auto u = raibert_step(s, g, p);
    CHECK(u.F == doctest::Approx(0.0));
    CHECK(u.tau == doctest::Approx(0.0));
  }

  SUBCASE("stance spring force plus thrust") {
    HopperParams q;
    q.k = 1000.0;
    q.l0 = 1.0;
    RaibertGains gg;
    gg.F_thrust = 20.0;
    HopperState s;
    s.phase = Phase::Stance;
    s.l = 0.9;
    s.l_dot = 0.5;
    auto u = raibert_step(s, gg, q);
    CHECK(u.F == doctest::Approx(120.0));
  }

  SUBCASE("zero gains give zero torque and pure spring force") {
    RaibertGains zero;
    zero.k_p = zero.k_v = zero.k_p_body = zero.k_v_body = 0.0;
    zero.k_p_leg = zero.k_v_leg = 0.0;
    zero.F_thrust = 0.0;
    HopperState s;
    s.phase = Phase::Stance;
    s.l = 0.93;
    s.l_dot = 0.4;
    s.psi = 0.3;
    auto u = raibert_step(s, zero, p);
    CHECK(u.tau == doctest::Approx(0.0));
    CHECK(u.F == doctest::Approx(p.k * (p.l0 - 0.93)));
  }

  SUBCASE("out-of-reach foot target is clamped, not thrown") {
    HopperState s;
    s.phase = Phase::Flight;
    s.l = 0.2;
    s.x_cm_dot = 50.0;  // silly speed: x_d would exceed l
    CHECK_NOTHROW(raibert_step(s, g, p));
  }
}
