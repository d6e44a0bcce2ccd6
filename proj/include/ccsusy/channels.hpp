#pragma once

#include <vector>

#include "ccsusy/linalg.hpp"

namespace ccsusy {

/// A set of scattering channels with pairwise distinct thresholds.
///
/// The permutation member records any channel reordering applied relative to
/// the order the set was originally defined in (identity by default).
class ChannelSet {
 public:
  explicit ChannelSet(std::vector<double> thresholds);
  ChannelSet(std::vector<double> thresholds, Permutation permutation);

  int size() const { return static_cast<int>(thresholds_.size()); }
  double threshold(int i) const { return thresholds_.at(static_cast<std::size_t>(i)); }
  const std::vector<double>& thresholds() const { return thresholds_; }
  const Permutation& permutation() const { return permutation_; }

  double min_threshold() const;
  double max_threshold() const;

  /// Channel set with channels listed in the order perm (new -> old), with
  /// the bookkeeping permutation composed accordingly.
  ChannelSet reordered(const Permutation& perm) const;

  bool operator==(const ChannelSet& other) const {
    return thresholds_ == other.thresholds_;
  }

 private:
  std::vector<double> thresholds_;
  Permutation permutation_;
};

/// Per-channel complex momenta on the physical branch Im k_i >= 0.
class WaveNumbers {
 public:
  WaveNumbers(ComplexVector values, double energy)
      : values_(std::move(values)), energy_(energy) {}

  int size() const { return static_cast<int>(values_.size()); }
  Complex value(int i) const { return values_(i); }
  const ComplexVector& values() const { return values_; }
  double energy() const { return energy_; }

  ComplexMatrix as_diagonal() const {
    return ComplexMatrix(values_.asDiagonal());
  }

  /// k -> -k (both halves of the solution basis; leaves the physical sheet).
  WaveNumbers negated() const { return WaveNumbers(-values_, energy_); }

  /// k -> -conj(k); stays on the branch Im k >= 0. Used for the Jost-matrix
  /// symmetry check F(k) = F*(-k*).
  WaveNumbers reflected() const { return WaveNumbers(-values_.conjugate(), energy_); }

 private:
  ComplexVector values_;
  double energy_;
};

/// Branch: k_i real >= 0 above threshold i, purely imaginary with positive
/// imaginary part below, exactly zero at E = threshold.
WaveNumbers channel_wavenumbers(double energy, const ChannelSet& channels);

/// open(i) = (E > threshold_i), strictly.
std::vector<bool> open_channel_mask(double energy, const ChannelSet& channels);

}  // namespace ccsusy
