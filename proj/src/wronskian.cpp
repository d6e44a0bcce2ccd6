#include "ccsusy/wronskian.hpp"

#include <cmath>
#include <sstream>

#include "ccsusy/errors.hpp"

namespace ccsusy {

ComplexMatrix wronskian(const SolutionSample& a, const SolutionSample& b) {
  if (a.value.rows() != a.value.cols() || a.derivative.rows() != a.value.rows() ||
      a.derivative.cols() != a.value.cols())
    throw DimensionMismatch("wronskian: first sample is not a square value/derivative pair");
  if (b.value.rows() != b.value.cols() || b.derivative.rows() != b.value.rows() ||
      b.derivative.cols() != b.value.cols())
    throw DimensionMismatch("wronskian: second sample is not a square value/derivative pair");
  if (a.value.rows() != b.value.rows())
    throw DimensionMismatch("wronskian: samples have different channel counts");
  if (std::abs(a.r - b.r) > 1e-12 * (1.0 + std::abs(a.r))) {
    std::ostringstream os;
    os << "wronskian: samples taken at different radii (" << a.r << " vs " << b.r << ")";
    throw DimensionMismatch(os.str());
  }
  return a.value.transpose() * b.derivative - a.derivative.transpose() * b.value;
}

}  // namespace ccsusy
