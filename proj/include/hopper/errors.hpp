// Error taxonomy shared by all hopper modules.
#pragma once

#include <stdexcept>
#include <string>

namespace hopper {

enum class Errc {
  NonPositiveLegLength,
  FootTargetOutOfReach,
  FlatSingularity,
  EmptySeries,
  UnsupportedDimension,
  DimensionMismatch,
  NoConvergence,
  MeshLimitExceeded,
  InvalidGuess,
  OutOfDomain,
  NonAscendingLiftoff,
  SignConventionViolated,
  TooFewSamples,
  NonFiniteState,
  SimulationDiverged,
  PlanFailure,
  InvalidConfig,
  InvalidArgument,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::NonPositiveLegLength: return "NonPositiveLegLength";
    case Errc::FootTargetOutOfReach: return "FootTargetOutOfReach";
    case Errc::FlatSingularity: return "FlatSingularity";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::UnsupportedDimension: return "UnsupportedDimension";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::MeshLimitExceeded: return "MeshLimitExceeded";
    case Errc::InvalidGuess: return "InvalidGuess";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::NonAscendingLiftoff: return "NonAscendingLiftoff";
    case Errc::SignConventionViolated: return "SignConventionViolated";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NonFiniteState: return "NonFiniteState";
    case Errc::SimulationDiverged: return "SimulationDiverged";
    case Errc::PlanFailure: return "PlanFailure";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace hopper
