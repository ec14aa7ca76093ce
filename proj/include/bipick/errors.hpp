#pragma once

#include <stdexcept>
#include <string>

namespace bipick {

/// Failure kinds surfaced by the solver stack. Classification outcomes
/// (degenerate, two-point extremal, infeasible problem) are answers, not
/// errors, and travel through return values instead.
enum class ErrorKind {
    NotHermitian,
    GrammianMismatch,
    NotAKernel,
    Infeasible,
    StallWithoutVerdict,
    DegenerateAtExtreme,
    NotRankOne,
    DegenerateFirstEntry,
    NoConvergence,
    JacobianSingular,
    IdenticallyVanishingDenominator,
    SingularResolvent,
    ZeroTargetRay,
    InvalidInput,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::GrammianMismatch: return "GrammianMismatch";
        case ErrorKind::NotAKernel: return "NotAKernel";
        case ErrorKind::Infeasible: return "Infeasible";
        case ErrorKind::StallWithoutVerdict: return "StallWithoutVerdict";
        case ErrorKind::DegenerateAtExtreme: return "DegenerateAtExtreme";
        case ErrorKind::NotRankOne: return "NotRankOne";
        case ErrorKind::DegenerateFirstEntry: return "DegenerateFirstEntry";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::JacobianSingular: return "JacobianSingular";
        case ErrorKind::IdenticallyVanishingDenominator: return "IdenticallyVanishingDenominator";
        case ErrorKind::SingularResolvent: return "SingularResolvent";
        case ErrorKind::ZeroTargetRay: return "ZeroTargetRay";
        case ErrorKind::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

class SolverError : public std::runtime_error {
  public:
    SolverError(ErrorKind kind, const std::string& stage, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " [" + stage + "]: " + what),
          kind_(kind),
          stage_(stage) {}

    ErrorKind kind() const { return kind_; }
    const std::string& stage() const { return stage_; }

  private:
    ErrorKind kind_;
    std::string stage_;
};

}  // namespace bipick
