#include "ccsusy/smatrix.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ccsusy/errors.hpp"

namespace ccsusy {

namespace {

constexpr double kPi = std::numbers::pi;

/// value + n*pi chosen so the result is as close as possible to target.
double unwrap_to(double value, double target) {
  return value + kPi * std::round((target - value) / kPi);
}

double reduce_half_open(double x) {
  // reduce mod pi into (-pi/2, pi/2]
  double y = std::remainder(x, kPi);
  if (y <= -kPi / 2) y += kPi;
  return y;
}

}  // namespace

int SMatrixPoint::open_count() const {
  int n = 0;
  for (bool b : open_mask) n += b ? 1 : 0;
  return n;
}

int SMatrixPoint::open_channel(int a) const {
  int seen = 0;
  for (int i = 0; i < static_cast<int>(open_mask.size()); ++i) {
    if (open_mask[static_cast<std::size_t>(i)]) {
      if (seen == a) return i;
      ++seen;
    }
  }
  throw DimensionMismatch("SMatrixPoint: open channel index out of range");
}

SMatrixPoint s_matrix_from_jost(const ComplexMatrix& f_plus, const ComplexMatrix& f_minus,
                                const WaveNumbers& k, const ChannelSet& channels,
                                double singular_tol) {
  const int n = channels.size();
  if (f_plus.rows() != n || f_plus.cols() != n || f_minus.rows() != n || f_minus.cols() != n ||
      k.size() != n)
    throw DimensionMismatch("s_matrix_from_jost: matrix order does not match channel count");

  Eigen::PartialPivLU<ComplexMatrix> lu(f_plus);
  const Complex det = lu.determinant();
  const double scale = std::max(max_norm(f_plus), 1e-300);
  if (std::abs(det) < singular_tol * scale) {
    ComplexMatrix inv = lu.solve(ComplexMatrix::Identity(n, n));
    const double cond = max_norm(f_plus) * max_norm(inv);
    std::ostringstream os;
    os << "s_matrix_from_jost: det F(k) = " << std::abs(det) << " below tolerance at E = "
       << k.energy() << " (condition estimate " << cond
       << "); bound state or spurious energy";
    throw SingularJost(os.str(), std::abs(det), cond);
  }

  const ComplexMatrix t = f_minus * lu.solve(ComplexMatrix::Identity(n, n));

  SMatrixPoint out;
  out.energy = k.energy();
  out.open_mask = open_channel_mask(k.energy(), channels);
  std::vector<int> open;
  for (int i = 0; i < n; ++i)
    if (out.open_mask[static_cast<std::size_t>(i)]) open.push_back(i);

  const int m = static_cast<int>(open.size());
  out.s = ComplexMatrix(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const double ka = k.value(open[static_cast<std::size_t>(a)]).real();
      const double kb = k.value(open[static_cast<std::size_t>(b)]).real();
      out.s(a, b) = t(open[static_cast<std::size_t>(a)], open[static_cast<std::size_t>(b)]) *
                    std::sqrt(kb / ka);
    }
  }
  return out;
}

Eigenphases2 Eigenphases2::swapped() const {
  Eigenphases2 out;
  out.delta1 = delta2;
  out.delta2 = delta1;
  out.epsilon = reduce_half_open(epsilon + kPi / 2);
  return out;
}

Eigenphases2 eigenphases_2ch(const SMatrixPoint& sp, double tol) {
  if (sp.open_count() != 2 || sp.s.rows() != 2 || sp.s.cols() != 2)
    throw PreconditionViolated("eigenphases_2ch: exactly two open channels required");
  const ComplexMatrix& s = sp.s;

  const double sym = std::abs(s(0, 1) - s(1, 0));
  if (sym > tol) {
    std::ostringstream os;
    os << "eigenphases_2ch: symmetry defect " << sym << " exceeds tolerance " << tol;
    throw NotSymmetric(os.str());
  }
  const double uni = max_norm(ComplexMatrix(s * s.adjoint() - ComplexMatrix::Identity(2, 2)));
  if (uni > tol) {
    std::ostringstream os;
    os << "eigenphases_2ch: unitarity defect " << uni << " exceeds tolerance " << tol;
    throw NotUnitary(os.str());
  }

  const Complex off = 0.5 * (s(0, 1) + s(1, 0));
  const Complex d = s(0, 0) - s(1, 1);
  const Complex o = 2.0 * off;
  const Complex tr = s(0, 0) + s(1, 1);

  Eigenphases2 out;
  if (std::abs(o) <= 1e-14) {
    out.delta1 = reduce_half_open(0.5 * std::arg(s(0, 0)));
    out.delta2 = reduce_half_open(0.5 * std::arg(s(1, 1)));
    out.epsilon = 0.0;
    return out;
  }

  const Complex w = std::sqrt(d * d + o * o);  // = +/-(e^{2i d1} - e^{2i d2})
  if (std::abs(w) < 1e-12) {
    // degenerate eigenvalues: S is (numerically) a multiple of the identity
    out.delta1 = out.delta2 = reduce_half_open(0.5 * std::arg(0.5 * tr));
    out.epsilon = 0.0;
    return out;
  }

  const double cos2e = (d / w).real();
  const double sin2e = -(o / w).real();
  out.epsilon = 0.5 * std::atan2(sin2e, cos2e);

  const Complex a = 0.5 * (tr + w);
  const Complex b = 0.5 * (tr - w);
  out.delta1 = reduce_half_open(0.5 * std::arg(a));
  out.delta2 = reduce_half_open(0.5 * std::arg(b));
  return out;
}

ComplexMatrix eigenphases_to_smatrix(const Eigenphases2& ph) {
  const double c = std::cos(ph.epsilon);
  const double s = std::sin(ph.epsilon);
  RealMatrix rot(2, 2);
  rot << c, -s, s, c;
  ComplexMatrix diag = ComplexMatrix::Zero(2, 2);
  diag(0, 0) = std::exp(Complex(0.0, 2.0 * ph.delta1));
  diag(1, 1) = std::exp(Complex(0.0, 2.0 * ph.delta2));
  return rot.transpose() * diag * rot;
}

std::vector<PhasePoint> compute_phase_curve(const JostFunction& jost,
                                            const ChannelSet& channels,
                                            const std::vector<double>& energies, double tol) {
  std::vector<PhasePoint> out;
  out.reserve(energies.size());
  for (double e : energies) {
    PhasePoint pt;
    pt.energy = e;
    const WaveNumbers k = channel_wavenumbers(e, channels);
    const auto mask = open_channel_mask(e, channels);
    int n_open = 0;
    for (bool b : mask) n_open += b ? 1 : 0;
    pt.n_open = n_open;
    if (n_open >= 1) {
      const ComplexMatrix fp = jost(k);
      const ComplexMatrix fm = jost(k.negated());
      const SMatrixPoint sp = s_matrix_from_jost(fp, fm, k, channels);
      if (n_open == 1) {
        pt.delta2 = reduce_half_open(0.5 * std::arg(sp.s(0, 0)));
      } else if (n_open == 2) {
        const Eigenphases2 ph = eigenphases_2ch(sp, tol);
        pt.delta1 = ph.delta1;
        pt.delta2 = ph.delta2;
        pt.epsilon = ph.epsilon;
      } else {
        throw PreconditionViolated(
            "compute_phase_curve: eigenphase decomposition is defined for at most two open "
            "channels");
      }
    }
    out.push_back(pt);
  }
  return out;
}

void unwrap_phase_curve(std::vector<PhasePoint>& curve) {
  std::optional<double> prev_d2;
  std::optional<Eigenphases2> prev2;

  auto cost = [](const Eigenphases2& ph, const Eigenphases2& ref) {
    return std::abs(ph.delta1 - ref.delta1) + std::abs(ph.delta2 - ref.delta2) +
           std::abs(ph.epsilon - ref.epsilon);
  };
  auto aligned = [&](Eigenphases2 ph, const Eigenphases2& ref) {
    ph.delta1 = unwrap_to(ph.delta1, ref.delta1);
    ph.delta2 = unwrap_to(ph.delta2, ref.delta2);
    ph.epsilon = unwrap_to(ph.epsilon, ref.epsilon);
    return ph;
  };

  for (auto& pt : curve) {
    if (pt.n_open == 1 && pt.delta2) {
      double d = *pt.delta2;
      if (prev_d2) d = unwrap_to(d, *prev_d2);
      pt.delta2 = d;
      prev_d2 = d;
      prev2.reset();
    } else if (pt.n_open == 2 && pt.delta1 && pt.delta2 && pt.epsilon) {
      Eigenphases2 ph{*pt.delta1, *pt.delta2, *pt.epsilon};
      if (!prev2) {
        // seed from the per-point labels; only align delta2 (mod pi) with the
        // single-channel phase tracked below the threshold
        if (prev_d2) ph.delta2 = unwrap_to(ph.delta2, *prev_d2);
      } else {
        const Eigenphases2 cand1 = aligned(ph, *prev2);
        const Eigenphases2 cand2 = aligned(ph.swapped(), *prev2);
        ph = (cost(cand2, *prev2) < cost(cand1, *prev2)) ? cand2 : cand1;
        // at a degeneracy the rotation angle is arbitrary; keep the previous one
        if (std::abs(std::remainder(ph.delta1 - ph.delta2, kPi)) < 1e-7)
          ph.epsilon = prev2->epsilon;
      }
      pt.delta1 = ph.delta1;
      pt.delta2 = ph.delta2;
      pt.epsilon = ph.epsilon;
      prev2 = ph;
      prev_d2 = ph.delta2;
    }
  }
}

double jost_symmetry_defect(const JostFunction& jost, double energy,
                            const ChannelSet& channels) {
  const WaveNumbers k = channel_wavenumbers(energy, channels);
  const ComplexMatrix f = jost(k);
  const ComplexMatrix f_refl = jost(k.reflected());
  double defect = max_norm(ComplexMatrix(f - f_refl.conjugate()));
  if (energy < channels.min_threshold()) {
    defect = std::max(defect, max_norm(ComplexMatrix(f.imag().cast<Complex>())));
  }
  return defect;
}

}  // namespace ccsusy
