#include "ccsusy/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ccsusy/errors.hpp"

namespace ccsusy {

FactorizationSpec::FactorizationSpec(ChannelSet channels, double factorization_energy)
    : channels_(std::move(channels)), energy_(factorization_energy) {
  if (!(energy_ < channels_.min_threshold())) {
    std::ostringstream os;
    os << "factorization energy " << energy_ << " must lie strictly below all thresholds (min "
       << channels_.min_threshold() << ")";
    throw ConfigError(os.str());
  }
  kappa_.resize(channels_.size());
  for (int i = 0; i < channels_.size(); ++i)
    kappa_(i) = std::sqrt(channels_.threshold(i) - energy_);
}

FactorizationSpec FactorizationSpec::from_kappa(ChannelSet channels,
                                                const std::vector<double>& kappa) {
  if (static_cast<int>(kappa.size()) != channels.size())
    throw ConfigError("factorization.kappa: length does not match channel count");
  for (double v : kappa)
    if (!(v > 0.0)) throw ConfigError("factorization.kappa: entries must be positive");
  const double energy = channels.threshold(0) - kappa[0] * kappa[0];
  for (int i = 1; i < channels.size(); ++i) {
    const double ei = channels.threshold(i) - kappa[static_cast<std::size_t>(i)] *
                                                  kappa[static_cast<std::size_t>(i)];
    if (std::abs(ei - energy) > 1e-9 * std::max(1.0, std::abs(energy))) {
      std::ostringstream os;
      os << "factorization.kappa: entries are inconsistent (channel 1 implies energy " << energy
         << ", channel " << i + 1 << " implies " << ei << ")";
      throw ConfigError(os.str());
    }
  }
  return FactorizationSpec(std::move(channels), energy);
}

FactorizationSpec FactorizationSpec::from_kappa_of(ChannelSet channels, int channel,
                                                   double kappa_value) {
  if (channel < 0 || channel >= channels.size())
    throw ConfigError("factorization: channel index out of range");
  if (!(kappa_value > 0.0)) throw ConfigError("factorization: kappa must be positive");
  const double energy = channels.threshold(channel) - kappa_value * kappa_value;
  return FactorizationSpec(std::move(channels), energy);
}

U0Parametrization::U0Parametrization(const RealMatrix& u0) {
  if (u0.rows() != u0.cols() || u0.rows() < 1)
    throw DimensionMismatch("U0Parametrization: square matrix required");
  const double defect = symmetry_defect(u0);
  if (defect > 1e-12 * std::max(1.0, max_norm(u0))) {
    std::ostringstream os;
    os << "U0Parametrization: matrix must be symmetric (defect " << defect << ")";
    throw NotSymmetric(os.str());
  }
  u0_ = symmetrized(u0);
}

CanonicalParametrization::CanonicalParametrization(const FactorizationSpec& spec,
                                                   std::vector<int> primed, RealMatrix q0,
                                                   RealMatrix x0)
    : n_(spec.size()), rank_(static_cast<int>(primed.size())), q0_(std::move(q0)), x0_(std::move(x0)) {
  if (rank_ < 0 || rank_ > n_)
    throw PreconditionViolated("CanonicalParametrization: rank out of range");
  std::vector<bool> used(static_cast<std::size_t>(n_), false);
  for (int c : primed) {
    if (c < 0 || c >= n_ || used[static_cast<std::size_t>(c)])
      throw PreconditionViolated("CanonicalParametrization: invalid primed channel list");
    used[static_cast<std::size_t>(c)] = true;
  }
  std::sort(primed.begin(), primed.end(), [&](int a, int b) {
    return spec.channels().threshold(a) > spec.channels().threshold(b);
  });
  perm_ = primed;
  for (int c = 0; c < n_; ++c)
    if (!used[static_cast<std::size_t>(c)]) perm_.push_back(c);

  kappa_primed_.resize(rank_);
  for (int i = 0; i < rank_; ++i) kappa_primed_(i) = spec.kappa(perm_[static_cast<std::size_t>(i)]);
  kappa_unprimed_.resize(n_ - rank_);
  for (int j = 0; j < n_ - rank_; ++j)
    kappa_unprimed_(j) = spec.kappa(perm_[static_cast<std::size_t>(rank_ + j)]);

  if (q0_.rows() != n_ - rank_ || q0_.cols() != rank_) {
    std::ostringstream os;
    os << "CanonicalParametrization: q0 must be " << n_ - rank_ << "x" << rank_ << ", got "
       << q0_.rows() << "x" << q0_.cols();
    throw DimensionMismatch(os.str());
  }
  if (x0_.rows() != rank_ || x0_.cols() != rank_)
    throw DimensionMismatch("CanonicalParametrization: x0 must be rank x rank");
  if (rank_ > 0) {
    const double defect = symmetry_defect(x0_);
    if (defect > 1e-12 * std::max(1.0, max_norm(x0_)))
      throw NotSymmetric("CanonicalParametrization: x0 must be symmetric");
    x0_ = symmetrized(x0_);
  }

  // vanishing rule: coupling toward a faster-growing unprimed channel is zero
  const double scale = std::max(1.0, max_norm(q0_));
  for (int j = 0; j < n_ - rank_; ++j) {
    for (int i = 0; i < rank_; ++i) {
      if (kappa_primed_(i) < kappa_unprimed_(j)) {
        if (std::abs(q0_(j, i)) > 1e-12 * scale) {
          std::ostringstream os;
          os << "CanonicalParametrization: q0(" << j << "," << i
             << ") must vanish because kappa'_" << i << " < kappa''_" << j;
          throw PreconditionViolated(os.str());
        }
        q0_(j, i) = 0.0;
      }
    }
  }
}

int CanonicalParametrization::free_parameter_count() const {
  int count = rank_ * (rank_ + 1) / 2;
  for (int j = 0; j < n_ - rank_; ++j)
    for (int i = 0; i < rank_; ++i)
      if (kappa_primed_(i) > kappa_unprimed_(j)) ++count;
  return count;
}

}  // namespace ccsusy
