#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ccsusy/channels.hpp"
#include "ccsusy/linalg.hpp"

namespace ccsusy {

/// S-matrix at one energy, restricted to the open channels.
struct SMatrixPoint {
  double energy = 0.0;
  ComplexMatrix s;               // open-channel block only
  std::vector<bool> open_mask;   // per full channel, E > threshold strictly
  int open_count() const;
  /// Full-channel index of the a-th open channel.
  int open_channel(int a) const;
};

/// S(k) = k^{-1/2} F(-k) F(k)^{-1} k^{1/2}, restricted to open channels.
///
/// F_plus = F(k), F_minus = F(-k) at the physical wave numbers for k.energy().
/// Throws SingularJost when |det F(k)| < singular_tol * max|F| (a bound state
/// or spurious energy); the exception carries a condition-number estimate.
SMatrixPoint s_matrix_from_jost(const ComplexMatrix& f_plus, const ComplexMatrix& f_minus,
                                const WaveNumbers& k, const ChannelSet& channels,
                                double singular_tol = 1e-12);

/// Rotation-diagonalized form of a 2x2 symmetric unitary S-matrix:
///   S = R(eps)^T diag(e^{2i d1}, e^{2i d2}) R(eps),
///   R(eps) = [[cos eps, -sin eps], [sin eps, cos eps]].
/// Per-point values are reduced to (-pi/2, pi/2].
struct Eigenphases2 {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double epsilon = 0.0;

  /// The other admissible label order: deltas swapped, eps shifted by pi/2.
  Eigenphases2 swapped() const;
};

/// Blatt-Biedenharn style decomposition of a 2-open-channel S-matrix point.
/// Throws NotSymmetric / NotUnitary when defects exceed tol, and
/// PreconditionViolated unless exactly two channels are open.
Eigenphases2 eigenphases_2ch(const SMatrixPoint& s, double tol = 1e-8);

/// Recompose R(eps)^T diag(e^{2i d}) R(eps); inverse of eigenphases_2ch.
ComplexMatrix eigenphases_to_smatrix(const Eigenphases2& ph);

/// One row of an eigenphase table. With one open channel only delta2 is set
/// (the phase of the single open channel); with two all three are set.
struct PhasePoint {
  double energy = 0.0;
  int n_open = 0;
  std::optional<double> delta1;
  std::optional<double> delta2;
  std::optional<double> epsilon;
};

using JostFunction = std::function<ComplexMatrix(const WaveNumbers&)>;

/// Evaluates S on an energy grid and decomposes into per-point phases.
std::vector<PhasePoint> compute_phase_curve(const JostFunction& jost,
                                            const ChannelSet& channels,
                                            const std::vector<double>& energies,
                                            double tol = 1e-8);

/// Continuity pass: adds multiples of pi to each eigenphase to minimize
/// point-to-point jumps and swaps branch labels where the eigenvalue
/// trajectories cross. Also connects delta2 across a threshold.
void unwrap_phase_curve(std::vector<PhasePoint>& curve);

/// Max-norm of F(k) - conj(F(-conj(k))) at the physical k for this energy;
/// below all thresholds the imaginary part of F is included in the defect.
double jost_symmetry_defect(const JostFunction& jost, double energy,
                            const ChannelSet& channels);

}  // namespace ccsusy
