#pragma once

#include "ccsusy/linalg.hpp"

namespace ccsusy {

/// Matrix-valued solution sampled at a single radius.
struct SolutionSample {
  double r = 0.0;
  ComplexMatrix value;
  ComplexMatrix derivative;
};

/// W[a,b] = a^T b' - (a')^T b (plain transpose, no conjugation).
/// Constant in r for two solutions of the same equation at the same energy.
ComplexMatrix wronskian(const SolutionSample& a, const SolutionSample& b);

}  // namespace ccsusy
