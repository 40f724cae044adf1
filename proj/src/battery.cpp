#include "hopper/battery.hpp"

#include <cmath>
#include <functional>
#include <ostream>

#include "hopper/metrics.hpp"

namespace hopper::battery {

namespace {

struct Spec {
  bvp::BvpProblem problem;
  std::function<double(double)> analytic;  // first component
};

std::vector<double> uniform(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

// x'' = 0, x(0) = 0, x(1) = 1  ->  x = t.
Spec make_line() {
  Spec s;
  s.problem.dim = 2;
  s.problem.t0 = 0.0;
  s.problem.tf = 1.0;
  s.problem.rhs = [](double, std::span<const double> x, std::span<double> dx) {
    dx[0] = x[1];
    dx[1] = 0.0;
  };
  s.problem.bc = [](std::span<const double> x0, std::span<const double> xf, double,
                    std::span<double> res) {
    res[0] = x0[0];
    res[1] = xf[0] - 1.0;
  };
  s.problem.guess_times = uniform(0, 1, 5);
  s.problem.guess_states.assign(5, {0.0, 0.0});
  s.analytic = [](double t) { return t; };
  return s;
}

// x'' = 6t, x(0) = 0, x(1) = 1  ->  x = t^3.
Spec make_cubic() {
  Spec s;
  s.problem.dim = 2;
  s.problem.t0 = 0.0;
  s.problem.tf = 1.0;
  s.problem.rhs = [](double t, std::span<const double> x, std::span<double> dx) {
    dx[0] = x[1];
    dx[1] = 6.0 * t;
  };
  s.problem.bc = [](std::span<const double> x0, std::span<const double> xf, double,
                    std::span<double> res) {
    res[0] = x0[0];
    res[1] = xf[0] - 1.0;
  };
  s.problem.guess_times = uniform(0, 1, 5);
  s.problem.guess_states.assign(5, {0.0, 0.0});
  s.analytic = [](double t) { return t * t * t; };
  return s;
}

// x'' = -x, x(0) = 0, x(pi/2) = 1  ->  x = sin t.
Spec make_sine() {
  Spec s;
  s.problem.dim = 2;
  s.problem.t0 = 0.0;
  s.problem.tf = M_PI / 2.0;
  s.problem.rhs = [](double, std::span<const double> x, std::span<double> dx) {
    dx[0] = x[1];
    dx[1] = -x[0];
  };
  s.problem.bc = [](std::span<const double> x0, std::span<const double> xf, double,
                    std::span<double> res) {
    res[0] = x0[0];
    res[1] = xf[0] - 1.0;
  };
  s.problem.guess_times = uniform(0, M_PI / 2.0, 9);
  s.problem.guess_states.assign(9, {0.5, 0.0});
  s.analytic = [](double t) { return std::sin(t); };
  return s;
}

// x' = 2 with x(0) = 0, x(tf) = 3 and tf free  ->  tf = 1.5, x = 2t.
Spec make_freetime() {
  Spec s;
  s.problem.dim = 1;
  s.problem.t0 = 0.0;
  s.problem.free_tf = true;
  s.problem.tf_guess = 1.0;
  s.problem.rhs = [](double, std::span<const double>, std::span<double> dx) { dx[0] = 2.0; };
  s.problem.bc = [](std::span<const double> x0, std::span<const double> xf, double,
                    std::span<double> res) {
    res[0] = x0[0];
    res[1] = xf[0] - 3.0;
  };
  s.problem.guess_times = uniform(0, 1, 5);
  s.problem.guess_states.assign(5, {0.0});
  s.analytic = [](double t) { return 2.0 * t; };
  return s;
}

Spec make(const std::string& name) {
  if (name == "line") return make_line();
  if (name == "cubic") return make_cubic();
  if (name == "sine") return make_sine();
  if (name == "freetime") return make_freetime();
  std::string known;
  for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
  raise(Errc::InvalidArgument, "unknown battery problem '" + name + "' (known: " + known + ")");
}

}  // namespace

std::vector<std::string> names() { return {"line", "cubic", "sine", "freetime"}; }

BatteryResult solve(const std::string& name, double tol) {
  Spec spec = make(name);
  bvp::BvpOptions opts;
  opts.defect_tol = tol;
  BatteryResult out;
  out.name = name;
  out.solution = bvp::solve(spec.problem, opts);
  const double t0 = out.solution.mesh.front();
  const double tf = out.solution.mesh.back();
  std::vector<double> x(out.solution.dim);
  for (int i = 0; i <= 200; ++i) {
    const double t = t0 + (tf - t0) * i / 200.0;
    out.solution.dense_eval(t, x);
    out.max_error = std::max(out.max_error, std::abs(x[0] - spec.analytic(t)));
  }
  return out;
}

void write_solution_csv(const BatteryResult& result, std::ostream& os) {
  const Spec spec = make(result.name);
  os << "kind,t";
  for (int c = 0; c < result.solution.dim; ++c) os << ",x" << c;
  os << ",analytic,error\n";
  auto row = [&](const char* kind, double t, std::span<const double> x) {
    os << kind << ',' << sim::g17(t);
    for (double v : x) os << ',' << sim::g17(v);
    const double a = spec.analytic(t);
    os << ',' << sim::g17(a) << ',' << sim::g17(x[0] - a) << '\n';
  };
  for (size_t i = 0; i < result.solution.mesh.size(); ++i) {
    row("node", result.solution.mesh[i], result.solution.states[i]);
  }
  std::vector<double> x(result.solution.dim);
  const double t0 = result.solution.mesh.front();
  const double tf = result.solution.mesh.back();
  for (int i = 0; i <= 200; ++i) {
    const double t = t0 + (tf - t0) * i / 200.0;
    result.solution.dense_eval(t, x);
    row("dense", t, x);
  }
}

}  // namespace hopper::battery
