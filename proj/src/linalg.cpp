#include "ccsusy/linalg.hpp"

#include <algorithm>

#include "ccsusy/errors.hpp"

namespace ccsusy {

bool is_valid_permutation(const Permutation& p, int n) {
  if (static_cast<int>(p.size()) != n) return false;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int v : p) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = true;
  }
  return true;
}

RealMatrix sqrt_weight_sandwich(const RealVector& w, const RealMatrix& m) {
  const int n = static_cast<int>(m.rows());
  if (w.size() != n || m.cols() != n)
    throw DimensionMismatch("sqrt_weight_sandwich: size mismatch");
  RealMatrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out(i, j) = m(i, j) * (i == j ? w(i) : std::sqrt(w(i) * w(j)));
  return out;
}

RealMatrix permutation_matrix(const Permutation& perm) {
  const int n = static_cast<int>(perm.size());
  RealMatrix p = RealMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) p(perm[static_cast<std::size_t>(j)], j) = 1.0;
  return p;
}

namespace {

template <typename Mat>
Mat permute_back_impl(const Mat& reordered, const Permutation& perm) {
  const int n = static_cast<int>(perm.size());
  if (reordered.rows() != n || reordered.cols() != n)
    throw DimensionMismatch("permute_back: matrix order does not match permutation size");
  Mat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) =
          reordered(i, j);
  return out;
}

}  // namespace

RealMatrix permute_back(const RealMatrix& reordered, const Permutation& perm) {
  return permute_back_impl(reordered, perm);
}

ComplexMatrix permute_back(const ComplexMatrix& reordered, const Permutation& perm) {
  return permute_back_impl(reordered, perm);
}

}  // namespace ccsusy
