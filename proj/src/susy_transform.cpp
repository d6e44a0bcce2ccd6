#include "ccsusy/susy_transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ccsusy/errors.hpp"

namespace ccsusy {

namespace {

void check_param_size(int param_n, const FactorizationSpec& spec, const char* what) {
  if (param_n != spec.size()) {
    std::ostringstream os;
    os << what << ": parametrization order " << param_n << " does not match channel count "
       << spec.size();
    throw DimensionMismatch(os.str());
  }
}

/// X(r) and Q(r) in the reordered basis. Entries forced to zero by the
/// vanishing rule are skipped so no growing exponential is ever formed.
RealMatrix x_of_r(const CanonicalParametrization& p, double r) {
  const int rank = p.rank();
  RealMatrix x(rank, rank);
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < rank; ++j)
      x(i, j) = p.x0()(i, j) * std::exp(-(p.kappa_primed()(i) + p.kappa_primed()(j)) * r);
  return x;
}

RealMatrix q_of_r(const CanonicalParametrization& p, double r) {
  const int rank = p.rank();
  const int rest = p.size() - rank;
  RealMatrix q(rest, rank);
  for (int j = 0; j < rest; ++j) {
    for (int i = 0; i < rank; ++i) {
      const double q0 = p.q0()(j, i);
      q(j, i) = (q0 == 0.0)
                    ? 0.0
                    : q0 * std::exp((p.kappa_unprimed()(j) - p.kappa_primed()(i)) * r);
    }
  }
  return q;
}

RealVector kappa_reordered(const CanonicalParametrization& p) {
  RealVector k(p.size());
  k.head(p.rank()) = p.kappa_primed();
  k.tail(p.size() - p.rank()) = p.kappa_unprimed();
  return k;
}

struct CanonicalBlocks {
  RealMatrix x, q, y;
  Eigen::PartialPivLU<RealMatrix> lu_y;
};

CanonicalBlocks canonical_blocks(const CanonicalParametrization& p,
                                 const FactorizationSpec& /*spec*/, double r) {
  CanonicalBlocks b;
  b.x = x_of_r(p, r);
  b.q = q_of_r(p, r);
  b.y = RealMatrix::Identity(p.rank(), p.rank()) + b.x + b.q.transpose() * b.q;
  if (p.rank() > 0) {
    b.lu_y = Eigen::PartialPivLU<RealMatrix>(b.y);
    const double det = b.lu_y.determinant();
    if (std::abs(det) < 1e-12 * std::max(1.0, max_norm(b.y))) {
      std::ostringstream os;
      os << "factorization solution singular: det Y(r) = " << det << " at r = " << r;
      throw SingularY(os.str(), r);
    }
  }
  return b;
}

double det_y(const CanonicalParametrization& p, double r) {
  if (p.rank() == 0) return 1.0;
  const RealMatrix x = x_of_r(p, r);
  const RealMatrix q = q_of_r(p, r);
  const RealMatrix y = RealMatrix::Identity(p.rank(), p.rank()) + x + q.transpose() * q;
  return y.determinant();
}

RealMatrix potential_from_superpotential(const RealMatrix& u, const FactorizationSpec& spec) {
  const RealMatrix kappa2 = spec.kappa_vector().cwiseProduct(spec.kappa_vector()).asDiagonal();
  return 2.0 * (u * u - kappa2);
}

/// Adaptive Simpson quadrature for matrix-valued integrands.
RealMatrix simpson_recurse(const std::function<RealMatrix(double)>& f, double a, double b,
                           const RealMatrix& fa, const RealMatrix& fm, const RealMatrix& fb,
                           const RealMatrix& whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const RealMatrix flm = f(lm);
  const RealMatrix frm = f(rm);
  const RealMatrix left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const RealMatrix right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const RealMatrix sum = left + right;
  const double err = max_norm(RealMatrix(sum - whole));
  // the 4e-16 floor stops refinement once roundoff dominates the estimate
  const double target = 15.0 * std::max(tol, 4e-16) * std::max(1.0, max_norm(sum));
  if (depth <= 0 || err < target) return sum + (sum - whole) / 15.0;
  return simpson_recurse(f, a, m, fa, flm, fm, left, tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, tol, depth - 1);
}

RealMatrix adaptive_simpson(const std::function<RealMatrix(double)>& f, double a, double b,
                            double tol) {
  const RealMatrix fa = f(a);
  const RealMatrix fb = f(b);
  const RealMatrix fm = f(0.5 * (a + b));
  const RealMatrix whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 28);
}

struct GreedySelection {
  std::vector<int> primed;  // original channel indices, descending threshold
  double margin = std::numeric_limits<double>::infinity();
};

/// Picks, in descending threshold order, every channel whose row of c2 is
/// linearly independent of the rows already picked.
GreedySelection greedy_select(const RealMatrix& c2, const FactorizationSpec& spec,
                              double tol_rel) {
  const int n = spec.size();
  std::vector<int> by_threshold(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) by_threshold[static_cast<std::size_t>(i)] = i;
  std::sort(by_threshold.begin(), by_threshold.end(), [&](int a, int b) {
    return spec.channels().threshold(a) > spec.channels().threshold(b);
  });

  const double tol = tol_rel * std::max(c2.norm(), 1e-300);
  GreedySelection sel;
  std::vector<RealVector> basis;  // orthonormal rows of the chosen span
  for (int c : by_threshold) {
    RealVector v = c2.row(c).transpose();
    for (const RealVector& b : basis) v -= b.dot(v) * b;
    // one re-orthogonalization pass keeps the residual meaningful
    for (const RealVector& b : basis) v -= b.dot(v) * b;
    const double resid = v.norm();
    if (resid > tol) {
      sel.primed.push_back(c);
      basis.push_back(v / resid);
      sel.margin = std::min(sel.margin, resid / tol);
    }
  }
  return sel;
}

ComplexVector jost_denominator(const RealVector& u_inf, const WaveNumbers& k) {
  ComplexVector den(u_inf.size());
  for (int i = 0; i < u_inf.size(); ++i) {
    den(i) = Complex(u_inf(i), 0.0) - Complex(0.0, 1.0) * k.value(i);
    if (std::abs(den(i)) < 1e-14 * (1.0 + std::abs(k.value(i)))) {
      std::ostringstream os;
      os << "transformed Jost matrix has a pole in channel " << i + 1
         << " at this energy (factorization energy with a decaying asymptotic channel)";
      throw Error(os.str());
    }
  }
  return den;
}

}  // namespace

std::pair<RealMatrix, RealMatrix> sigma_from_u0(const U0Parametrization& param,
                                                const FactorizationSpec& spec, double r) {
  check_param_size(param.size(), spec, "sigma_from_u0");
  const int n = spec.size();
  RealVector ch(n), sh(n);
  for (int i = 0; i < n; ++i) {
    ch(i) = std::cosh(spec.kappa(i) * r);
    sh(i) = std::sinh(spec.kappa(i) * r);
  }
  RealMatrix sigma = RealMatrix(ch.asDiagonal()) +
                     RealMatrix((sh.cwiseQuotient(spec.kappa_vector())).asDiagonal()) * param.u0();
  RealMatrix dsigma = RealMatrix((spec.kappa_vector().cwiseProduct(sh)).asDiagonal()) +
                      RealMatrix(ch.asDiagonal()) * param.u0();
  if (!sigma.allFinite() || !dsigma.allFinite()) {
    std::ostringstream os;
    os << "sigma_from_u0: overflow at r = " << r << " (kappa_max * r too large)";
    throw Error(os.str());
  }
  return {std::move(sigma), std::move(dsigma)};
}

RealMatrix superpotential_from_u0(const U0Parametrization& param, const FactorizationSpec& spec,
                                  double r) {
  auto [sigma, dsigma] = sigma_from_u0(param, spec, r);
  Eigen::PartialPivLU<RealMatrix> lu(RealMatrix(sigma.transpose()));
  // U = sigma' sigma^{-1}, computed as a solve against sigma^T
  const RealMatrix u = lu.solve(RealMatrix(dsigma.transpose())).transpose();
  // near a zero of det sigma the logarithmic derivative blows up; that is the
  // robust signal of a singular (excluded) potential at this radius
  const double u_limit = 1e8 * (spec.kappa_max() + max_norm(param.u0()) + 1.0);
  if (!u.allFinite() || max_norm(u) > u_limit) {
    std::ostringstream os;
    os << "superpotential_from_u0: det sigma vanishes near r = " << r;
    throw SingularSigma(os.str(), r);
  }
  return u;
}

void jost_basis_coefficients(const U0Parametrization& param, const FactorizationSpec& spec,
                             RealMatrix* c2, RealMatrix* d2) {
  check_param_size(param.size(), spec, "jost_basis_coefficients");
  const RealVector inv_sqrt = spec.kappa_sqrt().cwiseInverse();
  const RealMatrix base = RealMatrix(spec.kappa_diag()) + param.u0();
  const RealMatrix base_m = RealMatrix(spec.kappa_diag()) - param.u0();
  if (c2) *c2 = 0.5 * RealMatrix(inv_sqrt.asDiagonal()) * base;
  if (d2) *d2 = 0.5 * RealMatrix(inv_sqrt.asDiagonal()) * base_m;
}

Canonicalization canonicalize(const RealMatrix& c2, const RealMatrix& d2,
                              const FactorizationSpec& spec, double tol_rel) {
  const int n = spec.size();
  if (c2.rows() != n || c2.cols() != n || d2.rows() != n || d2.cols() != n)
    throw DimensionMismatch("canonicalize: C2 and D2 must be channel-order square matrices");

  const double pair_scale = std::max(1.0, max_norm(c2) * max_norm(d2));
  const double sym_defect = max_norm(RealMatrix(d2.transpose() * c2 - c2.transpose() * d2));
  if (sym_defect > 1e-10 * pair_scale) {
    std::ostringstream os;
    os << "canonicalize: D2^T C2 - C2^T D2 has defect " << sym_defect
       << "; the superpotential would not be symmetric";
    throw SymmetryViolated(os.str());
  }

  GreedySelection sel = greedy_select(c2, spec, tol_rel);
  const int rank = static_cast<int>(sel.primed.size());

  Eigen::ColPivHouseholderQR<RealMatrix> qr(c2);
  qr.setThreshold(tol_rel);
  if (qr.rank() != rank) {
    std::ostringstream os;
    os << "canonicalize: rank detection disagreement (pivoted QR " << qr.rank() << ", greedy "
       << rank << "); input is numerically borderline";
    throw RankDeficientPivot(os.str());
  }

  // rows: primed channels first, remaining channels in original order
  Permutation row_perm = sel.primed;
  {
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int c : sel.primed) used[static_cast<std::size_t>(c)] = true;
    for (int c = 0; c < n; ++c)
      if (!used[static_cast<std::size_t>(c)]) row_perm.push_back(c);
  }
  RealMatrix c3(n, n), d3(n, n);
  for (int i = 0; i < n; ++i) {
    c3.row(i) = c2.row(row_perm[static_cast<std::size_t>(i)]);
    d3.row(i) = d2.row(row_perm[static_cast<std::size_t>(i)]);
  }

  // columns: an independent set moved to the front, kept in ascending order
  Permutation col_perm = identity_permutation(n);
  if (rank > 0 && rank < n) {
    Eigen::ColPivHouseholderQR<RealMatrix> qr_top(c3.topRows(rank));
    qr_top.setThreshold(tol_rel);
    std::vector<int> lead(qr_top.colsPermutation().indices().data(),
                          qr_top.colsPermutation().indices().data() + n);
    lead.resize(static_cast<std::size_t>(rank));
    std::sort(lead.begin(), lead.end());
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    col_perm.clear();
    for (int c : lead) {
      col_perm.push_back(c);
      used[static_cast<std::size_t>(c)] = true;
    }
    for (int c = 0; c < n; ++c)
      if (!used[static_cast<std::size_t>(c)]) col_perm.push_back(c);
  }
  const RealMatrix pi_col = permutation_matrix(col_perm);
  const RealMatrix c = c3 * pi_col;
  const RealMatrix d = d3 * pi_col;

  const int rest = n - rank;
  const RealMatrix m_block = c.topLeftCorner(rank, rank);
  Eigen::PartialPivLU<RealMatrix> lu_m(m_block);

  // C[:, rank:] = C[:, :rank] * P, determined by the independent top rows
  const RealMatrix p_block = rank > 0 ? RealMatrix(lu_m.solve(c.topRightCorner(rank, rest)))
                                      : RealMatrix(0, rest);
  // bottom rows are Q0 times the top ones
  RealMatrix q0(rest, rank);
  if (rank > 0) {
    Eigen::PartialPivLU<RealMatrix> lu_mt(RealMatrix(m_block.transpose()));
    q0 = lu_mt.solve(RealMatrix(c.bottomLeftCorner(rest, rank).transpose())).transpose();
  }

  RealMatrix t1 = RealMatrix::Zero(n, n);
  if (rank > 0) {
    t1.topLeftCorner(rank, rank) = lu_m.solve(RealMatrix::Identity(rank, rank));
    t1.topRightCorner(rank, rest) = p_block;
  }
  t1.bottomRightCorner(rest, rest) = -RealMatrix::Identity(rest, rest);

  const RealMatrix dt1 = d * t1;
  const RealMatrix d11 = dt1.topLeftCorner(rank, rank);
  const RealMatrix d21 = dt1.bottomLeftCorner(rest, rank);
  const RealMatrix d22 = dt1.bottomRightCorner(rest, rest);

  Eigen::PartialPivLU<RealMatrix> lu_d22;
  if (rest > 0) {
    lu_d22 = Eigen::PartialPivLU<RealMatrix>(d22);
    const double det = lu_d22.determinant();
    if (std::abs(det) < 1e-12 * std::pow(std::max(max_norm(d22), 1e-300), rest))
      throw SingularD22(
          "canonicalize: lower-right block of D is singular; the factorization solution is "
          "singular for every radius");
  }

  RealMatrix x0 = d11 + q0.transpose() * d21;
  if (rank > 0) {
    const double defect = symmetry_defect(x0);
    if (defect > 1e-8 * std::max(1.0, max_norm(x0)))
      throw SymmetryViolated("canonicalize: X0 not symmetric; inconsistent (C2, D2) pair");
    x0 = symmetrized(x0);
  }

  RealMatrix t2 = RealMatrix::Identity(n, n);
  if (rest > 0) {
    const RealMatrix d22_inv = lu_d22.solve(RealMatrix::Identity(rest, rest));
    if (rank > 0) t2.bottomLeftCorner(rest, rank) = -d22_inv * d21;
    t2.bottomRightCorner(rest, rest) = d22_inv;
  }

  // clamp rule-bound entries before constructing the parametrization
  RealMatrix q0_clamped = q0;
  {
    RealVector kp(rank), ku(rest);
    for (int i = 0; i < rank; ++i) kp(i) = spec.kappa(row_perm[static_cast<std::size_t>(i)]);
    for (int j = 0; j < rest; ++j)
      ku(j) = spec.kappa(row_perm[static_cast<std::size_t>(rank + j)]);
    const double clamp = 1e-9 * std::max(1.0, max_norm(q0));
    for (int j = 0; j < rest; ++j)
      for (int i = 0; i < rank; ++i)
        if (kp(i) < ku(j) && std::abs(q0_clamped(j, i)) <= clamp) q0_clamped(j, i) = 0.0;
  }

  Canonicalization out{
      CanonicalParametrization(spec, sel.primed, std::move(q0_clamped), std::move(x0)),
      pi_col * t1 * t2, sel.margin};
  return out;
}

RealMatrix superpotential_canonical(const CanonicalParametrization& param,
                                    const FactorizationSpec& spec, double r) {
  check_param_size(param.size(), spec, "superpotential_canonical");
  const int rank = param.rank();
  const int n = param.size();
  const int rest = n - rank;
  CanonicalBlocks b = canonical_blocks(param, spec, r);

  RealMatrix m(n, n);
  if (rank > 0) {
    RealMatrix y_inv = b.lu_y.solve(RealMatrix::Identity(rank, rank));
    // one refinement step keeps the inverse accurate when X0 is large
    y_inv += y_inv * (RealMatrix::Identity(rank, rank) - b.y * y_inv);
    m.topLeftCorner(rank, rank) = y_inv;
    m.topRightCorner(rank, rest) = y_inv * b.q.transpose();
    m.bottomLeftCorner(rest, rank) = b.q * y_inv;
    m.bottomRightCorner(rest, rest) = b.q * y_inv * b.q.transpose();
  } else {
    m.setZero();
  }

  const RealVector kr = kappa_reordered(param);
  const RealMatrix u_re = RealMatrix((-kr).asDiagonal()) + 2.0 * sqrt_weight_sandwich(kr, m);
  return permute_back(u_re, param.reorder());
}

std::pair<RealMatrix, RealMatrix> sigma_canonical(const CanonicalParametrization& param,
                                                  const FactorizationSpec& spec, double r) {
  check_param_size(param.size(), spec, "sigma_canonical");
  const int rank = param.rank();
  const int n = param.size();
  const int rest = n - rank;
  const RealMatrix x = x_of_r(param, r);
  const RealMatrix q = q_of_r(param, r);

  RealMatrix a(n, n), bmat(n, n);
  a.topLeftCorner(rank, rank) = RealMatrix::Identity(rank, rank) + x;
  a.topRightCorner(rank, rest) = -q.transpose();
  a.bottomLeftCorner(rest, rank) = q;
  a.bottomRightCorner(rest, rest) = RealMatrix::Identity(rest, rest);
  bmat.topLeftCorner(rank, rank) = RealMatrix::Identity(rank, rank) - x;
  bmat.topRightCorner(rank, rest) = q.transpose();
  bmat.bottomLeftCorner(rest, rank) = q;
  bmat.bottomRightCorner(rest, rest) = -RealMatrix::Identity(rest, rest);

  const RealVector kr = kappa_reordered(param);
  RealVector e(n);
  for (int i = 0; i < rank; ++i) e(i) = std::exp(kr(i) * r);
  for (int j = 0; j < rest; ++j) e(rank + j) = std::exp(-kr(rank + j) * r);

  const RealVector inv_sqrt = kr.cwiseSqrt().cwiseInverse();
  const RealVector sqrt_k = kr.cwiseSqrt();
  RealMatrix sigma_re = RealMatrix(inv_sqrt.asDiagonal()) * a * RealMatrix(e.asDiagonal());
  RealMatrix dsigma_re = RealMatrix(sqrt_k.asDiagonal()) * bmat * RealMatrix(e.asDiagonal());
  if (!sigma_re.allFinite() || !dsigma_re.allFinite()) {
    std::ostringstream os;
    os << "sigma_canonical: overflow at r = " << r;
    throw Error(os.str());
  }

  const RealMatrix p = permutation_matrix(param.reorder());
  return {p * sigma_re, p * dsigma_re};
}

RealMatrix superpotential_row_form(const CanonicalParametrization& param,
                                   const FactorizationSpec& spec, double r) {
  check_param_size(param.size(), spec, "superpotential_row_form");
  if (param.rank() > 0 && max_norm(param.x0()) != 0.0)
    throw PreconditionViolated("superpotential_row_form: requires X0 = 0");
  const int rank = param.rank();
  const int n = param.size();
  const int rest = n - rank;
  const RealVector kr = kappa_reordered(param);
  const RealVector s = kr.cwiseSqrt();

  RealMatrix u_re;
  if (rest == 0) {
    u_re = RealMatrix(kr.asDiagonal());
  } else {
    const RealMatrix q = q_of_r(param, r);
    RealMatrix qr_block(rest, n);
    qr_block.leftCols(rank) = q;
    qr_block.rightCols(rest) = -RealMatrix::Identity(rest, rest);
    const RealMatrix g = qr_block * qr_block.transpose();
    const RealMatrix proj = qr_block.transpose() * g.lu().solve(qr_block);
    u_re = RealMatrix(kr.asDiagonal()) - 2.0 * sqrt_weight_sandwich(kr, proj);
  }
  return permute_back(u_re, param.reorder());
}

RealMatrix superpotential_column_form(const CanonicalParametrization& param,
                                      const FactorizationSpec& spec, double r) {
  check_param_size(param.size(), spec, "superpotential_column_form");
  if (param.rank() > 0 && max_norm(param.x0()) != 0.0)
    throw PreconditionViolated("superpotential_column_form: requires X0 = 0");
  const int rank = param.rank();
  const int n = param.size();
  const int rest = n - rank;
  const RealVector kr = kappa_reordered(param);
  const RealVector s = kr.cwiseSqrt();

  RealMatrix u_re;
  if (rank == 0) {
    u_re = RealMatrix((-kr).asDiagonal());
  } else {
    const RealMatrix q = q_of_r(param, r);
    RealMatrix qc(n, rank);
    qc.topRows(rank) = RealMatrix::Identity(rank, rank);
    qc.bottomRows(rest) = q;
    const RealMatrix h = qc.transpose() * qc;
    const RealMatrix proj = qc * h.lu().solve(qc.transpose());
    u_re = RealMatrix((-kr).asDiagonal()) + 2.0 * sqrt_weight_sandwich(kr, proj);
  }
  return permute_back(u_re, param.reorder());
}

RealMatrix superpotential_rank_one_outer(const FactorizationSpec& spec,
                                         const RealVector& x_column, double r) {
  if (x_column.size() != spec.size())
    throw DimensionMismatch("superpotential_rank_one_outer: column length mismatch");
  RealVector xr(spec.size());
  for (int i = 0; i < spec.size(); ++i) xr(i) = x_column(i) * std::exp(-spec.kappa(i) * r);
  const double denom = 1.0 + xr.squaredNorm();
  return RealMatrix(spec.kappa_vector().asDiagonal()) -
         (2.0 / denom) * sqrt_weight_sandwich(spec.kappa_vector(),
                                              RealMatrix(xr * xr.transpose()));
}

AsymptoticForm u_at_infinity(const U0Parametrization& param, const FactorizationSpec& spec,
                             double tol_rel) {
  check_param_size(param.size(), spec, "u_at_infinity");
  RealMatrix c2;
  jost_basis_coefficients(param, spec, &c2, nullptr);
  GreedySelection sel = greedy_select(c2, spec, tol_rel);

  AsymptoticForm out;
  out.rank = static_cast<int>(sel.primed.size());
  out.primed = sel.primed;
  out.rank_margin = sel.margin;
  out.u_inf = -spec.kappa_vector();
  for (int c : sel.primed) out.u_inf(c) = spec.kappa(c);
  return out;
}

AsymptoticForm u_at_infinity(const CanonicalParametrization& param,
                             const FactorizationSpec& spec) {
  check_param_size(param.size(), spec, "u_at_infinity");
  AsymptoticForm out;
  out.rank = param.rank();
  out.primed.assign(param.reorder().begin(), param.reorder().begin() + param.rank());
  out.rank_margin = std::numeric_limits<double>::infinity();
  out.u_inf = -spec.kappa_vector();
  for (int c : out.primed) out.u_inf(c) = spec.kappa(c);
  return out;
}

RealMatrix transformed_potential(const U0Parametrization& param, const FactorizationSpec& spec,
                                 double r) {
  return potential_from_superpotential(superpotential_from_u0(param, spec, r), spec);
}

RealMatrix transformed_potential(const CanonicalParametrization& param,
                                 const FactorizationSpec& spec, double r) {
  return potential_from_superpotential(superpotential_canonical(param, spec, r), spec);
}

ComplexMatrix transformed_jost_matrix(const RealMatrix& u0, const RealVector& u_inf,
                                      const WaveNumbers& k) {
  const int n = static_cast<int>(u0.rows());
  if (u_inf.size() != n || k.size() != n)
    throw DimensionMismatch("transformed_jost_matrix: size mismatch");
  const ComplexVector den = jost_denominator(u_inf, k);
  ComplexMatrix f(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Complex num = Complex(u0(i, j), 0.0);
      if (i == j) num -= Complex(0.0, 1.0) * k.value(i);
      f(i, j) = num / den(i);
    }
  }
  return f;
}

ComplexMatrix transformed_jost_general(const RealMatrix& u0, const RealVector& u_inf,
                                       const JostFunction& f_initial,
                                       const JostFunction& g_initial, const WaveNumbers& k) {
  const int n = static_cast<int>(u0.rows());
  if (u_inf.size() != n || k.size() != n)
    throw DimensionMismatch("transformed_jost_general: size mismatch");
  const ComplexVector den = jost_denominator(u_inf, k);
  const ComplexMatrix num = f_initial(k) * u0.cast<Complex>() + g_initial(k);
  ComplexMatrix f(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) f(i, j) = num(i, j) / den(i);
  return f;
}

ComplexMatrix transformed_jost_solution(const RealMatrix& u_at_r, const RealVector& u_inf,
                                        const WaveNumbers& k, double r) {
  const int n = static_cast<int>(u_at_r.rows());
  if (u_inf.size() != n || k.size() != n)
    throw DimensionMismatch("transformed_jost_solution: size mismatch");
  const ComplexVector den = jost_denominator(u_inf, k);
  ComplexMatrix f(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Complex num = Complex(u_at_r(i, j), 0.0);
      if (i == j) num -= Complex(0.0, 1.0) * k.value(i);
      f(i, j) = num * std::exp(Complex(0.0, 1.0) * k.value(j) * r) / den(j);
    }
  }
  return f;
}

namespace {

FactorizationEnergySolutions factorization_solutions_impl(
    const std::function<std::pair<RealMatrix, RealMatrix>(double)>& sigma_at, int n, double r,
    double r0, double quad_tol, double u_limit) {
  auto [sigma, dsigma] = sigma_at(r);
  Eigen::PartialPivLU<RealMatrix> lu(RealMatrix(sigma.transpose()));
  const RealMatrix u_check = lu.solve(RealMatrix(dsigma.transpose())).transpose();
  if (!u_check.allFinite() || max_norm(u_check) > u_limit) {
    std::ostringstream os;
    os << "solution_at_factorization_energy: sigma singular near r = " << r;
    throw SingularSigma(os.str(), r);
  }
  const RealMatrix phi = lu.solve(RealMatrix::Identity(n, n));
  const RealMatrix dphi = -phi * dsigma.transpose() * phi;

  const auto integrand = [&](double s) {
    auto [sg, dsg] = sigma_at(s);
    (void)dsg;
    return RealMatrix(sg.transpose() * sg);
  };
  const RealMatrix j = adaptive_simpson(integrand, r0, r, quad_tol);
  // orientation chosen so that W(phi, psi) = -I
  const RealMatrix psi = -phi * j;
  const RealMatrix dpsi = -dphi * j - sigma;

  FactorizationEnergySolutions out;
  out.phi = SolutionSample{r, phi.cast<Complex>(), dphi.cast<Complex>()};
  out.psi = SolutionSample{r, psi.cast<Complex>(), dpsi.cast<Complex>()};
  return out;
}

}  // namespace

FactorizationEnergySolutions solution_at_factorization_energy(const U0Parametrization& param,
                                                              const FactorizationSpec& spec,
                                                              double r, double r0,
                                                              double quad_tol) {
  check_param_size(param.size(), spec, "solution_at_factorization_energy");
  const double u_limit = 1e8 * (spec.kappa_max() + max_norm(param.u0()) + 1.0);
  return factorization_solutions_impl([&](double s) { return sigma_from_u0(param, spec, s); },
                                      spec.size(), r, r0, quad_tol, u_limit);
}

FactorizationEnergySolutions solution_at_factorization_energy(
    const CanonicalParametrization& param, const FactorizationSpec& spec, double r, double r0,
    double quad_tol) {
  check_param_size(param.size(), spec, "solution_at_factorization_energy");
  const double u_limit =
      1e8 * (spec.kappa_max() + max_norm(param.x0()) + max_norm(param.q0()) + 1.0);
  return factorization_solutions_impl([&](double s) { return sigma_canonical(param, spec, s); },
                                      spec.size(), r, r0, quad_tol, u_limit);
}

CanonicalParametrization canonical_from_u0_2x2(const U0Parametrization& param,
                                               const FactorizationSpec& spec) {
  check_param_size(param.size(), spec, "canonical_from_u0_2x2");
  if (spec.size() != 2) throw PreconditionViolated("canonical_from_u0_2x2: two channels required");

  // work in descending-threshold order
  std::vector<int> order{0, 1};
  if (spec.channels().threshold(0) < spec.channels().threshold(1)) order = {1, 0};
  const double k1 = spec.kappa(order[0]);
  const double k2 = spec.kappa(order[1]);
  const double a1 = param.u0()(order[0], order[0]);
  const double a2 = param.u0()(order[1], order[1]);
  const double beta = param.u0()(order[0], order[1]);

  const double det = (a1 + k1) * (a2 + k2) - beta * beta;  // det[U(0) + kappa]
  const double scale = std::max({1.0, std::abs(a1 + k1) * std::abs(a2 + k2), beta * beta});
  if (std::abs(det) < 1e-10 * scale) {
    // rank < 2: fall back to the generic reduction
    RealMatrix c2, d2;
    jost_basis_coefficients(param, spec, &c2, &d2);
    Canonicalization canon = canonicalize(c2, d2, spec);
    if (canon.param.rank() == 2)
      throw RankDrop("canonical_from_u0_2x2: det[U(0)+kappa] ~ 0 but rank detection kept 2");
    return canon.param;
  }

  RealMatrix x0(2, 2);
  x0(0, 0) = (beta * beta - (a1 - k1) * (a2 + k2)) / det;
  x0(1, 1) = (beta * beta - (a1 + k1) * (a2 - k2)) / det;
  x0(0, 1) = x0(1, 0) = -2.0 * beta * std::sqrt(k1 * k2) / det;
  return CanonicalParametrization(spec, order, RealMatrix(0, 2), x0);
}

U0Parametrization u0_from_canonical_2x2(const CanonicalParametrization& param,
                                        const FactorizationSpec& spec) {
  check_param_size(param.size(), spec, "u0_from_canonical_2x2");
  if (spec.size() != 2) throw PreconditionViolated("u0_from_canonical_2x2: two channels required");
  return U0Parametrization(superpotential_canonical(param, spec, 0.0));
}

TransformResult::TransformResult(FactorizationSpec spec, CanonicalParametrization canonical,
                                 RealMatrix u0, double rank_margin)
    : spec_(std::move(spec)),
      canonical_(std::move(canonical)),
      u0_(std::move(u0)),
      rank_margin_(rank_margin) {
  const AsymptoticForm asym = u_at_infinity(canonical_, spec_);
  u_inf_ = asym.u_inf;
}

RealMatrix TransformResult::superpotential(double r) const {
  return superpotential_canonical(canonical_, spec_, r);
}

RealMatrix TransformResult::potential(double r) const {
  return potential_from_superpotential(superpotential(r), spec_);
}

ComplexMatrix TransformResult::jost(const WaveNumbers& k) const {
  return transformed_jost_matrix(u0_, u_inf_, k);
}

ComplexMatrix TransformResult::jost(double energy) const {
  return jost(channel_wavenumbers(energy, spec_.channels()));
}

ComplexMatrix TransformResult::jost_solution(const WaveNumbers& k, double r) const {
  return transformed_jost_solution(superpotential(r), u_inf_, k, r);
}

ComplexMatrix TransformResult::jost_solution(double energy, double r) const {
  return jost_solution(channel_wavenumbers(energy, spec_.channels()), r);
}

JostFunction TransformResult::jost_function() const {
  const RealMatrix u0 = u0_;
  const RealVector u_inf = u_inf_;
  return [u0, u_inf](const WaveNumbers& k) { return transformed_jost_matrix(u0, u_inf, k); };
}

namespace {

double auto_scan_horizon(const CanonicalParametrization& param, const FactorizationSpec& spec) {
  // covers both the generic decay horizon and radii where ||X(r)|| has
  // certainly dropped below 1 (no further zero of det Y possible)
  double horizon = 16.2 / spec.kappa_min();
  if (param.rank() > 0) {
    const double x_norm = param.x0().norm();
    const double kp_min = param.kappa_primed().minCoeff();
    if (x_norm > 1.0) horizon = std::max(horizon, std::log(x_norm) / (2.0 * kp_min) + 2.0);
  }
  return horizon;
}

void scan_regularity(const CanonicalParametrization& param, const FactorizationSpec& spec,
                     const TransformOptions& opts, bool from_u0) {
  if (param.rank() == 0) return;  // Y is empty, the superpotential is -kappa everywhere
  const double r_max = opts.scan_r_max > 0.0 ? opts.scan_r_max : auto_scan_horizon(param, spec);
  const int n_pts = std::max(opts.scan_points, 16);

  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n_pts));
  grid.push_back(0.0);
  const double r_lo = r_max * 1e-5;
  for (int i = 1; i < n_pts; ++i) {
    const double t = static_cast<double>(i - 1) / static_cast<double>(n_pts - 2);
    grid.push_back(r_lo * std::pow(r_max / r_lo, t));
  }

  auto fail = [&](double radius) {
    std::ostringstream os;
    os << "parametrization rejected: factorization solution singular near r = " << radius;
    if (from_u0)
      throw SingularSigma(os.str(), radius);
    else
      throw SingularY(os.str(), radius);
  };

  double prev_r = grid[0];
  double prev_det = det_y(param, prev_r);
  if (std::abs(prev_det) < 1e-12) fail(prev_r);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double r = grid[i];
    const double det = det_y(param, r);
    if (std::abs(det) < 1e-12) fail(r);
    if ((det > 0.0) != (prev_det > 0.0)) {
      double lo = prev_r, hi = r, dlo = prev_det;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double dm = det_y(param, mid);
        if ((dm > 0.0) == (dlo > 0.0)) {
          lo = mid;
          dlo = dm;
        } else {
          hi = mid;
        }
      }
      fail(0.5 * (lo + hi));
    }
    prev_r = r;
    prev_det = det;
  }
}

}  // namespace

TransformResult make_transform(const FactorizationSpec& spec, const U0Parametrization& param,
                               const TransformOptions& opts) {
  check_param_size(param.size(), spec, "make_transform");
  RealMatrix c2, d2;
  jost_basis_coefficients(param, spec, &c2, &d2);
  Canonicalization canon = canonicalize(c2, d2, spec);
  scan_regularity(canon.param, spec, opts, /*from_u0=*/true);
  return TransformResult(spec, std::move(canon.param), param.u0(), canon.rank_margin);
}

TransformResult make_transform(const FactorizationSpec& spec,
                               const CanonicalParametrization& param,
                               const TransformOptions& opts) {
  check_param_size(param.size(), spec, "make_transform");
  scan_regularity(param, spec, opts, /*from_u0=*/false);
  RealMatrix u0 = superpotential_canonical(param, spec, 0.0);
  return TransformResult(spec, param, symmetrized(u0),
                         std::numeric_limits<double>::infinity());
}

}  // namespace ccsusy
