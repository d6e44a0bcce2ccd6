#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace ccsusy {

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// Entrywise max-abs norm; the library's default matrix norm for defects.
template <typename Derived>
double max_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

template <typename Derived>
double symmetry_defect(const Eigen::MatrixBase<Derived>& m) {
  return max_norm(m - m.transpose());
}

inline RealMatrix symmetrized(const RealMatrix& m) { return 0.5 * (m + m.transpose()); }

/// w^{1/2} m w^{1/2} for a positive diagonal w, with the diagonal formed as
/// w_i * m_ii directly so that diagonal weights apply exactly.
RealMatrix sqrt_weight_sandwich(const RealVector& w, const RealMatrix& m);

/// Permutation stored as new-index -> original-index.
using Permutation = std::vector<int>;

inline Permutation identity_permutation(int n) {
  Permutation p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  return p;
}

bool is_valid_permutation(const Permutation& p, int n);

/// Matrix P with P(perm[j], j) = 1, so that x_user = P * x_reordered.
RealMatrix permutation_matrix(const Permutation& perm);

/// Conjugates a matrix in the reordered basis back to user channel order.
RealMatrix permute_back(const RealMatrix& reordered, const Permutation& perm);
ComplexMatrix permute_back(const ComplexMatrix& reordered, const Permutation& perm);

}  // namespace ccsusy
