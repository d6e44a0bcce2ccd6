#pragma once

#include <functional>
#include <vector>

#include "ccsusy/channels.hpp"
#include "ccsusy/linalg.hpp"
#include "ccsusy/smatrix.hpp"

namespace ccsusy {

using PotentialFunction = std::function<RealMatrix(double)>;

enum class IntegrationMethod { rk4, numerov };

struct IntegrationConfig {
  double r_max = 12.0;
  double step = 0.0;  // must be set; see default_integration_config
  IntegrationMethod method = IntegrationMethod::rk4;
  double match_tolerance = 1e-8;  // required bound on ||V(r_max)||
};

/// Default step rule: step = 1/(factor * max(kappa_max, sqrt(E))), with the
/// radius rounded so that r_max is an exact multiple of the step.
IntegrationConfig default_integration_config(double kappa_max, double energy, double r_max = 12.0,
                                             double step_factor = 20.0);

/// Regular matrix solution phi(0) = 0, phi'(0) = I of -phi'' + V phi = k^2 phi,
/// sampled at requested checkpoints (grid-aligned) and at r_max.
struct RegularSolutionTrace {
  double energy = 0.0;
  struct Sample {
    double r = 0.0;
    RealMatrix phi;
    RealMatrix dphi;
  };
  std::vector<Sample> samples;  // ascending r; last one at r_max
  const Sample& final_sample() const { return samples.back(); }
};

RegularSolutionTrace integrate_regular(const PotentialFunction& potential, double energy,
                                       const ChannelSet& channels, const IntegrationConfig& cfg,
                                       const std::vector<double>& checkpoints = {});

/// Jost matrices from the solution trace by matching (phi, phi') at r_max to
/// the free asymptotic basis e^{+-ikr}:
///   F(k)  = e^{ik r} (phi' - ik phi),   F(-k) = e^{-ik r} (phi' + ik phi).
/// v_tail_norm is ||V(r_max)||; it must be below cfg.match_tolerance.
/// Closed channels make the match exponentially ill-conditioned; extraction
/// refuses when exp(max Im k_i * r_max) exceeds ~1e8.
ComplexMatrix extract_jost(const RegularSolutionTrace& trace, const ChannelSet& channels,
                           const IntegrationConfig& cfg, double v_tail_norm);
std::pair<ComplexMatrix, ComplexMatrix> extract_jost_pair(const RegularSolutionTrace& trace,
                                                          const ChannelSet& channels,
                                                          const IntegrationConfig& cfg,
                                                          double v_tail_norm);

/// One-call S-matrix from direct integration of the potential.
SMatrixPoint oracle_smatrix(const PotentialFunction& potential, double energy,
                            const ChannelSet& channels, const IntegrationConfig& cfg);

/// Jost solution f(k,r) -> e^{ikr} obtained by integrating inward from
/// r_max; sampled at the requested radii (grid-aligned, ascending).
std::vector<std::pair<double, ComplexMatrix>> oracle_jost_solution(
    const PotentialFunction& potential, double energy, const ChannelSet& channels,
    const IntegrationConfig& cfg, const std::vector<double>& radii);

/// Bound states as zeros of the (real) determinant of the Jost matrix below
/// all thresholds: sign-change scan plus bisection to 1e-10. Sign changes at
/// poles of det F are recognized by their diverging magnitude and dropped.
std::vector<double> bound_state_scan(const JostFunction& jost, const ChannelSet& channels,
                                     double e_min, double e_max, int n_grid);

/// Observed convergence order of the extracted Jost matrix under step
/// halving: log2 of consecutive error ratios.
double observed_convergence_order(const PotentialFunction& potential, double energy,
                                  const ChannelSet& channels, const IntegrationConfig& cfg,
                                  double v_tail_norm);

}  // namespace ccsusy
