#pragma once
// Error types and numerical tolerances shared by every module.

#include <stdexcept>
#include <string>

namespace symplag {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define SYMPLAG_ERROR(Name)                                          \
  struct Name : Error {                                              \
    using Error::Error;                                              \
    const char* kind() const noexcept override { return #Name; }     \
  }

SYMPLAG_ERROR(ChartDomainError);
SYMPLAG_ERROR(DeterminantError);
SYMPLAG_ERROR(NotSymplectic);
SYMPLAG_ERROR(GridTooSmall);
SYMPLAG_ERROR(GeometryMismatch);
SYMPLAG_ERROR(NonRealH);
SYMPLAG_ERROR(NotClosed);
SYMPLAG_ERROR(UmbilicPoint);
SYMPLAG_ERROR(NotGeneric);
SYMPLAG_ERROR(IntegrationBlowup);
SYMPLAG_ERROR(FrameDefect);
SYMPLAG_ERROR(NotAdapted);
SYMPLAG_ERROR(NotLagrangian);
SYMPLAG_ERROR(NotElliptic);
SYMPLAG_ERROR(ParameterDomain);
SYMPLAG_ERROR(NotHolomorphic);
SYMPLAG_ERROR(ConfigError);
SYMPLAG_ERROR(IoError);

#undef SYMPLAG_ERROR

// Defaults are overridable from the CLI via --tol-<name>.
struct Tolerances {
  double group = 1e-10;      // symplectic defect of exact constructions
  double rank = 1e-12;       // degeneracy of determinants and denominators
  double frame = 1e-8;       // symplectic defect of integrated frames
  double flat = 1e-6;        // flatness residual before integration warns
  double gauge = 1e-6;       // adapted-gauge residuals in extract_invariants
  double congruent = 1e-6;   // congruence decision threshold
  double resid = 1e-6;       // generic residual checks (holomorphy, closedness, reality)
  double umbilic = 1e-8;     // |h| below this counts as umbilic
};

}  // namespace symplag
