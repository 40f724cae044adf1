// Built-in analytic BVP battery exposed through the CLI for inspection.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hopper/bvp.hpp"

namespace hopper::battery {

struct BatteryResult {
  std::string name;
  bvp::BvpSolution solution;
  double max_error = 0.0;  ///< dense error against the analytic solution
};

/// Problem names accepted by solve().
std::vector<std::string> names();

/// Solves a named problem at the given defect tolerance.
/// Throws InvalidArgument for unknown names.
BatteryResult solve(const std::string& name, double tol);

/// mesh CSV: t,x0[,x1...] at the nodes followed by 201 dense samples with an
/// `analytic` column and the pointwise error.
void write_solution_csv(const BatteryResult& result, std::ostream& os);

}  // namespace hopper::battery
