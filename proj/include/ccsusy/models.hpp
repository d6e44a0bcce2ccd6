#pragma once

#include "ccsusy/channels.hpp"
#include "ccsusy/factorization.hpp"
#include "ccsusy/linalg.hpp"
#include "ccsusy/smatrix.hpp"

namespace ccsusy {

/// Two-channel exactly-solvable model with a fully coupled Jost matrix (the
/// Cox potential). Coded directly from its printed closed forms so it can
/// serve as an independent cross-check of the generic machinery.
class CoxModel2x2 {
 public:
  /// alpha1, alpha2, beta are the entries of the superpotential at the
  /// origin. Construction requires the full-rank condition
  /// (kappa1+alpha1)(kappa2+alpha2) - beta^2 != 0.
  CoxModel2x2(FactorizationSpec spec, double alpha1, double alpha2, double beta);

  const FactorizationSpec& spec() const { return spec_; }
  double alpha1() const { return alpha1_; }
  double alpha2() const { return alpha2_; }
  double beta() const { return beta_; }
  RealMatrix u0() const;

  double det_sigma(double r) const;
  RealMatrix superpotential(double r) const;
  ComplexMatrix jost(const WaveNumbers& k) const;
  ComplexMatrix jost(double energy) const;
  JostFunction jost_function() const;

 private:
  FactorizationSpec spec_;
  double alpha1_, alpha2_, beta_;
};

/// Two-channel model whose factorization solution has a single growing
/// direction; the asymptotic superpotential is diag(+kappa1, -kappa2).
class RankOneModel2x2 {
 public:
  /// Requires kappa1 > kappa2 (channel 1 carries the larger threshold) and
  /// x0 > -1 - q0^2 for regularity.
  RankOneModel2x2(FactorizationSpec spec, double q0, double x0);

  /// Builds the model from origin values (alpha1, alpha2, beta); they must
  /// satisfy the degeneracy condition
  /// (kappa1+alpha1)(kappa2+alpha2) - beta^2 = 0 to 1e-10.
  static RankOneModel2x2 from_u0(FactorizationSpec spec, double alpha1, double alpha2,
                                 double beta);

  const FactorizationSpec& spec() const { return spec_; }
  double q0() const { return q0_; }
  double x0() const { return x0_; }

  double alpha1() const;
  double alpha2() const;
  double beta() const;
  RealMatrix u0() const;

  RealMatrix superpotential(double r) const;
  ComplexMatrix jost(const WaveNumbers& k) const;
  ComplexMatrix jost(double energy) const;
  JostFunction jost_function() const;

 private:
  FactorizationSpec spec_;
  double q0_, x0_;
};

/// Three-channel model with kappa1 > kappa3 > kappa2 and two growing
/// directions; shows a positive asymptotic entry on the lowest threshold.
class ThreeChannelRank2Model {
 public:
  /// Requires kappa1 > kappa3 > kappa2 and q0^2 > x0^2 - 1.
  ThreeChannelRank2Model(FactorizationSpec spec, double q0, double x0);

  const FactorizationSpec& spec() const { return spec_; }
  double q0() const { return q0_; }
  double x0() const { return x0_; }

  double det_sigma(double r) const;
  RealMatrix superpotential(double r) const;
  RealVector u_infinity() const;

 private:
  FactorizationSpec spec_;
  double q0_, x0_;
};

/// Root kappa2 of (sqrt(delta_gap + kappa2^2) + alpha1)(kappa2 + alpha2) = beta^2,
/// the boundary where the two-channel model drops to rank one. Solved by
/// bisection to ~1e-13.
double rank1_kappa2_root(double delta_gap, double alpha1, double alpha2, double beta);

/// Local minimum of |det F(E)| on (e_lo, e_hi): grid scan plus golden-section
/// refinement. Operational definition of the resonance position.
double resonance_energy_absdet(const JostFunction& jost, const ChannelSet& channels,
                               double e_lo, double e_hi, int n_grid = 400);

}  // namespace ccsusy
