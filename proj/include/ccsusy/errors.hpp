#pragma once

#include <stdexcept>
#include <string>

namespace ccsusy {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

/// Raised when a configuration or user input fails validation.
struct ConfigError : Error {
  using Error::Error;
};

/// det F(k) vanishes within tolerance; the S-matrix is undefined there.
struct SingularJost : Error {
  SingularJost(const std::string& msg, double abs_det_, double cond_)
      : Error(msg), abs_det(abs_det_), cond(cond_) {}
  double abs_det = 0.0;
  double cond = 0.0;
};

struct NotUnitary : Error {
  using Error::Error;
};

struct NotSymmetric : Error {
  using Error::Error;
};

/// The factorization solution becomes singular at some radius; the
/// parametrization generates a singular potential and is rejected.
struct SingularSigma : Error {
  SingularSigma(const std::string& msg, double radius_) : Error(msg), radius(radius_) {}
  double radius = 0.0;
};

/// Canonical-form variant of SingularSigma (det Y(r) = 0).
struct SingularY : SingularSigma {
  using SingularSigma::SingularSigma;
};

/// Input pair (C, D) violates the symmetry constraint of the factorization
/// solution, so the resulting superpotential would not be symmetric.
struct SymmetryViolated : Error {
  using Error::Error;
};

/// Lower-right block of D is singular: the factorization solution is
/// singular for every radius.
struct SingularD22 : Error {
  using Error::Error;
};

struct RankDeficientPivot : Error {
  using Error::Error;
};

struct PreconditionViolated : Error {
  using Error::Error;
};

/// 2x2 parameter map requested at a rank-deficient point.
struct RankDrop : Error {
  using Error::Error;
};

/// Jost extraction attempted in a regime where the linear match is
/// dominated by closed-channel growth.
struct IllConditionedMatch : Error {
  IllConditionedMatch(const std::string& msg, double cond_estimate_)
      : Error(msg), cond_estimate(cond_estimate_) {}
  double cond_estimate = 0.0;
};

/// Integrator norm growth beyond the overflow guard.
struct StepUnstable : Error {
  using Error::Error;
};

/// A verification run exceeded one of its documented tolerances.
struct VerificationFailure : Error {
  using Error::Error;
};

}  // namespace ccsusy
