#pragma once

#include <vector>

#include "ccsusy/channels.hpp"
#include "ccsusy/linalg.hpp"

namespace ccsusy {

/// Factorization energy below all thresholds together with the positive
/// diagonal of decay constants kappa_i = sqrt(threshold_i - energy).
class FactorizationSpec {
 public:
  FactorizationSpec(ChannelSet channels, double factorization_energy);

  /// Builds the spec from the full kappa list; the entries must be mutually
  /// consistent (kappa_i^2 - threshold_i equal across channels).
  static FactorizationSpec from_kappa(ChannelSet channels, const std::vector<double>& kappa);

  /// Builds the spec from a single channel's decay constant.
  static FactorizationSpec from_kappa_of(ChannelSet channels, int channel, double kappa_value);

  const ChannelSet& channels() const { return channels_; }
  int size() const { return channels_.size(); }
  double energy() const { return energy_; }
  double kappa(int i) const { return kappa_(i); }
  const RealVector& kappa_vector() const { return kappa_; }
  double kappa_min() const { return kappa_.minCoeff(); }
  double kappa_max() const { return kappa_.maxCoeff(); }

  RealMatrix kappa_diag() const { return RealMatrix(kappa_.asDiagonal()); }
  RealVector kappa_sqrt() const { return kappa_.cwiseSqrt(); }

 private:
  ChannelSet channels_;
  double energy_;
  RealVector kappa_;
};

/// Transformation fixed by the symmetric value of the superpotential at the
/// origin; the factorization solution is cosh(kr) + sinh(kr) k^{-1} U0.
class U0Parametrization {
 public:
  explicit U0Parametrization(const RealMatrix& u0);
  const RealMatrix& u0() const { return u0_; }
  int size() const { return static_cast<int>(u0_.rows()); }

 private:
  RealMatrix u0_;
};

/// Canonical form of the factorization solution: rank R, the channel
/// reordering that splits kappa into the primed (growing) and double-primed
/// (decaying) sets, and the coefficient blocks Q0 ((N-R) x R) and symmetric
/// X0 (R x R).
///
/// Entries q0(j,i) with kappa'_i < kappa''_j are required to vanish; this is
/// what makes the off-diagonal coupling decay at infinity.
class CanonicalParametrization {
 public:
  /// primed: original channel indices forming the growing set; they are
  /// sorted internally by descending threshold. q0 must be indexed in the
  /// reordered basis (rows: unprimed in original order, cols: primed).
  CanonicalParametrization(const FactorizationSpec& spec, std::vector<int> primed,
                           RealMatrix q0, RealMatrix x0);

  int size() const { return n_; }
  int rank() const { return rank_; }
  const Permutation& reorder() const { return perm_; }
  const RealMatrix& q0() const { return q0_; }
  const RealMatrix& x0() const { return x0_; }
  /// kappa values of the primed set, descending with threshold order.
  const RealVector& kappa_primed() const { return kappa_primed_; }
  const RealVector& kappa_unprimed() const { return kappa_unprimed_; }

  /// Number of parameters the transformed potential actually depends on:
  /// free entries of Q0 plus the entries of X0.
  int free_parameter_count() const;

 private:
  int n_ = 0;
  int rank_ = 0;
  Permutation perm_;
  RealMatrix q0_;
  RealMatrix x0_;
  RealVector kappa_primed_;
  RealVector kappa_unprimed_;
};

}  // namespace ccsusy
