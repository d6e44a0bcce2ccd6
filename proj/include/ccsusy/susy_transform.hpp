#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ccsusy/channels.hpp"
#include "ccsusy/factorization.hpp"
#include "ccsusy/linalg.hpp"
#include "ccsusy/smatrix.hpp"
#include "ccsusy/wronskian.hpp"

namespace ccsusy {

/// Factorization solution of the zero potential fixed by its origin data
/// sigma(0) = I, sigma'(0) = U(0), together with its exact derivative:
///   sigma(r)  = cosh(kappa r) + sinh(kappa r) kappa^{-1} U(0)
///   sigma'(r) = kappa sinh(kappa r) + cosh(kappa r) U(0)
std::pair<RealMatrix, RealMatrix> sigma_from_u0(const U0Parametrization& param,
                                                const FactorizationSpec& spec, double r);

/// U(r) = sigma'(r) sigma(r)^{-1}, evaluated literally. Accurate while
/// cond(sigma) stays moderate; for large radii prefer the canonical route.
RealMatrix superpotential_from_u0(const U0Parametrization& param,
                                  const FactorizationSpec& spec, double r);

/// Coefficients of the growing/decaying exponential split of the u0-route
/// factorization solution: sigma = kappa^{-1/2} (e^{kappa r} C2 + e^{-kappa r} D2).
void jost_basis_coefficients(const U0Parametrization& param, const FactorizationSpec& spec,
                             RealMatrix* c2, RealMatrix* d2);

struct Canonicalization {
  CanonicalParametrization param;
  /// Right multiplier T with (P_row C2) T and (P_row D2) T in canonical block
  /// form, P_row being the returned channel reordering.
  RealMatrix right_multiplier;
  /// Smallest accepted row-independence residual divided by the tolerance;
  /// values near 1 indicate a borderline rank decision.
  double rank_margin = 0.0;
};

/// Reduces a factorization-solution coefficient pair (C2, D2) to canonical
/// form: greedy channel reordering by descending threshold, column pivoting,
/// and elimination of the redundant right factor.
Canonicalization canonicalize(const RealMatrix& c2, const RealMatrix& d2,
                              const FactorizationSpec& spec, double tol_rel = 1e-10);

/// Superpotential in user channel order from the canonical parametrization;
/// every intermediate decays, so this form is stable at all radii.
RealMatrix superpotential_canonical(const CanonicalParametrization& param,
                                    const FactorizationSpec& spec, double r);

/// Factorization solution and derivative for the canonical parametrization
/// (user channel order).
std::pair<RealMatrix, RealMatrix> sigma_canonical(const CanonicalParametrization& param,
                                                  const FactorizationSpec& spec, double r);

/// Reduced closed forms, valid for X0 = 0: row-block and column-block
/// variants of the same projector formula. Both must agree with
/// superpotential_canonical wherever defined.
RealMatrix superpotential_row_form(const CanonicalParametrization& param,
                                   const FactorizationSpec& spec, double r);
RealMatrix superpotential_column_form(const CanonicalParametrization& param,
                                      const FactorizationSpec& spec, double r);

/// Full-rank closed form with X0 equal to an outer product x x^T.
RealMatrix superpotential_rank_one_outer(const FactorizationSpec& spec,
                                         const RealVector& x_column, double r);

struct AsymptoticForm {
  RealVector u_inf;         // diagonal entries, user channel order
  int rank = 0;             // number of +kappa entries
  std::vector<int> primed;  // channels carrying +kappa, descending threshold
  double rank_margin = 0.0;
};

/// Asymptotic diagonal of the superpotential: +kappa_i on the primed set,
/// -kappa_i elsewhere. For the u0 route the rank is detected numerically.
AsymptoticForm u_at_infinity(const U0Parametrization& param, const FactorizationSpec& spec,
                             double tol_rel = 1e-10);
AsymptoticForm u_at_infinity(const CanonicalParametrization& param,
                             const FactorizationSpec& spec);

/// V~ = 2 (U^2 - kappa^2); the zero-potential identity, no numerical
/// differentiation involved.
RealMatrix transformed_potential(const U0Parametrization& param, const FactorizationSpec& spec,
                                 double r);
RealMatrix transformed_potential(const CanonicalParametrization& param,
                                 const FactorizationSpec& spec, double r);

/// F~(k) = [U(inf) - ik]^{-1} [U(0) - ik] for the zero initial potential.
ComplexMatrix transformed_jost_matrix(const RealMatrix& u0, const RealVector& u_inf,
                                      const WaveNumbers& k);

/// General transform F~(k) = [U(inf) - ik]^{-1} [F(k) U(0) + G(k)] for a
/// caller-supplied initial potential described by its Jost data F, G.
ComplexMatrix transformed_jost_general(const RealMatrix& u0, const RealVector& u_inf,
                                       const JostFunction& f_initial,
                                       const JostFunction& g_initial, const WaveNumbers& k);

/// f~(k,r) = [U(r) - ik] e^{ikr} [U(inf) - ik]^{-1}.
ComplexMatrix transformed_jost_solution(const RealMatrix& u_at_r, const RealVector& u_inf,
                                        const WaveNumbers& k, double r);

/// Solutions at the factorization energy itself: phi = (sigma^T)^{-1} and a
/// second solution psi with W(phi, psi) = -I, obtained by quadrature.
struct FactorizationEnergySolutions {
  SolutionSample phi;
  SolutionSample psi;
};
FactorizationEnergySolutions solution_at_factorization_energy(const U0Parametrization& param,
                                                              const FactorizationSpec& spec,
                                                              double r, double r0,
                                                              double quad_tol = 1e-12);
FactorizationEnergySolutions solution_at_factorization_energy(
    const CanonicalParametrization& param, const FactorizationSpec& spec, double r, double r0,
    double quad_tol = 1e-12);

/// Two-channel parameter maps between the origin-value and canonical
/// parametrizations. The forward map throws RankDrop at det[U(0)+kappa] = 0,
/// where the canonical rank falls below 2.
CanonicalParametrization canonical_from_u0_2x2(const U0Parametrization& param,
                                               const FactorizationSpec& spec);
U0Parametrization u0_from_canonical_2x2(const CanonicalParametrization& param,
                                        const FactorizationSpec& spec);

struct TransformOptions {
  double scan_r_max = 0.0;  // 0 = automatic horizon from the decay rates
  int scan_points = 512;
};

/// Immutable bundle of evaluators for one SUSY partner of the zero
/// potential. Construction canonicalizes (for the u0 route) and pre-scans
/// the regularity of the factorization solution; singular parametrizations
/// are rejected with SingularSigma / SingularY.
class TransformResult {
 public:
  const FactorizationSpec& spec() const { return spec_; }
  const CanonicalParametrization& canonical() const { return canonical_; }
  int rank() const { return canonical_.rank(); }
  double rank_margin() const { return rank_margin_; }

  const RealMatrix& u_at_origin() const { return u0_; }
  const RealVector& u_infinity() const { return u_inf_; }

  RealMatrix superpotential(double r) const;
  RealMatrix potential(double r) const;
  ComplexMatrix jost(const WaveNumbers& k) const;
  ComplexMatrix jost(double energy) const;
  ComplexMatrix jost_solution(const WaveNumbers& k, double r) const;
  ComplexMatrix jost_solution(double energy, double r) const;

  /// Jost matrix as a reusable evaluator over arbitrary wave numbers.
  JostFunction jost_function() const;

 private:
  friend TransformResult make_transform(const FactorizationSpec&, const U0Parametrization&,
                                        const TransformOptions&);
  friend TransformResult make_transform(const FactorizationSpec&,
                                        const CanonicalParametrization&,
                                        const TransformOptions&);
  TransformResult(FactorizationSpec spec, CanonicalParametrization canonical, RealMatrix u0,
                  double rank_margin);

  FactorizationSpec spec_;
  CanonicalParametrization canonical_;
  RealMatrix u0_;
  RealVector u_inf_;
  double rank_margin_;
};

TransformResult make_transform(const FactorizationSpec& spec, const U0Parametrization& param,
                               const TransformOptions& opts = {});
TransformResult make_transform(const FactorizationSpec& spec,
                               const CanonicalParametrization& param,
                               const TransformOptions& opts = {});

}  // namespace ccsusy
