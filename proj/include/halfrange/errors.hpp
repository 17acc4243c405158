#pragma once

#include <stdexcept>
#include <string>

namespace halfrange {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define HALFRANGE_DEFINE_ERROR(Name)                         \
  struct Name : Error {                                      \
    explicit Name(const std::string& msg) : Error(msg) {}    \
  }

// Coefficient admissibility.
HALFRANGE_DEFINE_ERROR(NoSignChange);
HALFRANGE_DEFINE_ERROR(AmbiguousSign);
HALFRANGE_DEFINE_ERROR(FitFailure);
HALFRANGE_DEFINE_ERROR(NonzeroPotential);
HALFRANGE_DEFINE_ERROR(TailDivergence);

// Grid / operator assembly.
HALFRANGE_DEFINE_ERROR(BadGrading);
HALFRANGE_DEFINE_ERROR(SingularWeight);

// Spectral decomposition.
HALFRANGE_DEFINE_ERROR(NearZeroEigenvalue);
HALFRANGE_DEFINE_ERROR(EndpointOnSpectrum);

// Boundary system.
HALFRANGE_DEFINE_ERROR(IllConditionedRestriction);
HALFRANGE_DEFINE_ERROR(ContractionViolated);
HALFRANGE_DEFINE_ERROR(NeumannStall);
HALFRANGE_DEFINE_ERROR(OutOfSlab);

// Forcing.
HALFRANGE_DEFINE_ERROR(TailNotIntegrable);

// Weighted-space reduction.
HALFRANGE_DEFINE_ERROR(ZeroTEntry);
HALFRANGE_DEFINE_ERROR(NotSymmetric);
HALFRANGE_DEFINE_ERROR(NotPositive);

// Brute-force solver.
HALFRANGE_DEFINE_ERROR(SingularSystem);

// CLI / configuration / artifacts.
HALFRANGE_DEFINE_ERROR(ConfigError);
HALFRANGE_DEFINE_ERROR(GridHashMismatch);

#undef HALFRANGE_DEFINE_ERROR

}  // namespace halfrange
