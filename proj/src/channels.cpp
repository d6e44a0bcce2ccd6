#include "ccsusy/channels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ccsusy/errors.hpp"

namespace ccsusy {

namespace {

void validate_thresholds(const std::vector<double>& t) {
  if (t.empty()) throw ConfigError("channels.thresholds: at least one channel required");
  for (double v : t) {
    if (!std::isfinite(v)) throw ConfigError("channels.thresholds: entries must be finite");
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      if (t[i] == t[j]) {
        std::ostringstream os;
        os << "channels.thresholds: thresholds must be pairwise distinct (channels " << i + 1
           << " and " << j + 1 << " are both " << t[i] << ")";
        throw ConfigError(os.str());
      }
    }
  }
}

}  // namespace

ChannelSet::ChannelSet(std::vector<double> thresholds)
    : thresholds_(std::move(thresholds)),
      permutation_(identity_permutation(static_cast<int>(thresholds_.size()))) {
  validate_thresholds(thresholds_);
}

ChannelSet::ChannelSet(std::vector<double> thresholds, Permutation permutation)
    : thresholds_(std::move(thresholds)), permutation_(std::move(permutation)) {
  validate_thresholds(thresholds_);
  if (!is_valid_permutation(permutation_, size()))
    throw ConfigError("channels.permutation: not a bijection on channel indices");
}

double ChannelSet::min_threshold() const {
  return *std::min_element(thresholds_.begin(), thresholds_.end());
}

double ChannelSet::max_threshold() const {
  return *std::max_element(thresholds_.begin(), thresholds_.end());
}

ChannelSet ChannelSet::reordered(const Permutation& perm) const {
  if (!is_valid_permutation(perm, size()))
    throw ConfigError("channel reorder: not a bijection on channel indices");
  std::vector<double> t(thresholds_.size());
  Permutation composed(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    t[i] = thresholds_[static_cast<std::size_t>(perm[i])];
    composed[i] = permutation_[static_cast<std::size_t>(perm[i])];
  }
  return ChannelSet(std::move(t), std::move(composed));
}

WaveNumbers channel_wavenumbers(double energy, const ChannelSet& channels) {
  ComplexVector k(channels.size());
  for (int i = 0; i < channels.size(); ++i) {
    const double gap = energy - channels.threshold(i);
    if (gap > 0.0) {
      k(i) = Complex(std::sqrt(gap), 0.0);
    } else if (gap < 0.0) {
      k(i) = Complex(0.0, std::sqrt(-gap));
    } else {
      k(i) = Complex(0.0, 0.0);
    }
  }
  return WaveNumbers(std::move(k), energy);
}

std::vector<bool> open_channel_mask(double energy, const ChannelSet& channels) {
  std::vector<bool> mask(static_cast<std::size_t>(channels.size()));
  for (int i = 0; i < channels.size(); ++i)
    mask[static_cast<std::size_t>(i)] = energy > channels.threshold(i);
  return mask;
}

}  // namespace ccsusy
