#include "ccsusy/models.hpp"

#include <cmath>
#include <sstream>

#include "ccsusy/errors.hpp"

namespace ccsusy {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_two_channels(const FactorizationSpec& spec, const char* what) {
  if (spec.size() != 2) {
    std::ostringstream os;
    os << what << ": two channels required, got " << spec.size();
    throw PreconditionViolated(os.str());
  }
}

}  // namespace

CoxModel2x2::CoxModel2x2(FactorizationSpec spec, double alpha1, double alpha2, double beta)
    : spec_(std::move(spec)), alpha1_(alpha1), alpha2_(alpha2), beta_(beta) {
  require_two_channels(spec_, "CoxModel2x2");
  const double k1 = spec_.kappa(0);
  const double k2 = spec_.kappa(1);
  const double cond = (k1 + alpha1_) * (k2 + alpha2_) - beta_ * beta_;
  const double scale = std::max({1.0, std::abs((k1 + alpha1_) * (k2 + alpha2_)), beta_ * beta_});
  if (std::abs(cond) < 1e-10 * scale) {
    std::ostringstream os;
    os << "CoxModel2x2: (kappa1+alpha1)(kappa2+alpha2) - beta^2 = " << cond
       << " vanishes; the model degenerates to rank one";
    throw PreconditionViolated(os.str());
  }
}

RealMatrix CoxModel2x2::u0() const {
  RealMatrix m(2, 2);
  m << alpha1_, beta_, beta_, alpha2_;
  return m;
}

double CoxModel2x2::det_sigma(double r) const {
  // grouped as the product of the two decoupled factors minus the coupling
  // term, so every cancellation happens inside single-channel scalars
  const double k1 = spec_.kappa(0);
  const double k2 = spec_.kappa(1);
  const double s1 = std::sinh(k1 * r), s2 = std::sinh(k2 * r);
  const double a1 = std::cosh(k1 * r) + (alpha1_ / k1) * s1;
  const double a2 = std::cosh(k2 * r) + (alpha2_ / k2) * s2;
  return a1 * a2 - (beta_ * beta_ / (k1 * k2)) * s1 * s2;
}

RealMatrix CoxModel2x2::superpotential(double r) const {
  const double k1 = spec_.kappa(0);
  const double k2 = spec_.kappa(1);
  const double c1 = std::cosh(k1 * r), s1 = std::sinh(k1 * r);
  const double c2 = std::cosh(k2 * r), s2 = std::sinh(k2 * r);
  const double a1 = c1 + (alpha1_ / k1) * s1;
  const double a2 = c2 + (alpha2_ / k2) * s2;
  const double b1 = alpha1_ * c1 + k1 * s1;
  const double b2 = alpha2_ * c2 + k2 * s2;
  const double det = det_sigma(r);
  if (std::abs(det) < 1e-12 * std::max(1.0, c1 * c2)) {
    std::ostringstream os;
    os << "CoxModel2x2: det sigma vanishes at r = " << r;
    throw SingularSigma(os.str(), r);
  }

  const double u11 = (b1 * a2 - (beta_ * beta_ / k2) * c1 * s2) / det;
  const double u22 = (b2 * a1 - (beta_ * beta_ / k1) * c2 * s1) / det;
  const double u12 = beta_ / det;

  RealMatrix u(2, 2);
  u << u11, u12, u12, u22;
  return u;
}

ComplexMatrix CoxModel2x2::jost(const WaveNumbers& k) const {
  const double kap1 = spec_.kappa(0);
  const double kap2 = spec_.kappa(1);
  const Complex k1 = k.value(0), k2 = k.value(1);
  ComplexMatrix f(2, 2);
  f(0, 0) = (alpha1_ - kI * k1) / (kap1 - kI * k1);
  f(0, 1) = beta_ / (kap1 - kI * k1);
  f(1, 0) = beta_ / (kap2 - kI * k2);
  f(1, 1) = (alpha2_ - kI * k2) / (kap2 - kI * k2);
  return f;
}

ComplexMatrix CoxModel2x2::jost(double energy) const {
  return jost(channel_wavenumbers(energy, spec_.channels()));
}

JostFunction CoxModel2x2::jost_function() const {
  CoxModel2x2 copy = *this;
  return [copy](const WaveNumbers& k) { return copy.jost(k); };
}

RankOneModel2x2::RankOneModel2x2(FactorizationSpec spec, double q0, double x0)
    : spec_(std::move(spec)), q0_(q0), x0_(x0) {
  require_two_channels(spec_, "RankOneModel2x2");
  if (!(spec_.kappa(0) > spec_.kappa(1)))
    throw PreconditionViolated(
        "RankOneModel2x2: channel 1 must carry the larger threshold (kappa1 > kappa2)");
  if (!(x0_ > -1.0 - q0_ * q0_))
    throw PreconditionViolated("RankOneModel2x2: regularity requires x0 > -1 - q0^2");
}

RankOneModel2x2 RankOneModel2x2::from_u0(FactorizationSpec spec, double alpha1, double alpha2,
                                         double beta) {
  require_two_channels(spec, "RankOneModel2x2::from_u0");
  const double k1 = spec.kappa(0);
  const double k2 = spec.kappa(1);
  const double cond = (k1 + alpha1) * (k2 + alpha2) - beta * beta;
  if (std::abs(cond) > 1e-10) {
    std::ostringstream os;
    os << "RankOneModel2x2::from_u0: (kappa1+alpha1)(kappa2+alpha2) - beta^2 = " << cond
       << " must vanish to 1e-10";
    throw PreconditionViolated(os.str());
  }
  if (!(k1 + alpha1 > 0.0))
    throw PreconditionViolated("RankOneModel2x2::from_u0: kappa1 + alpha1 must be positive");
  const double y0 = 2.0 * k1 / (k1 + alpha1);
  const double q0sq = y0 * (k2 + alpha2) / (2.0 * k2);
  if (q0sq < 0.0)
    throw PreconditionViolated("RankOneModel2x2::from_u0: kappa2 + alpha2 must be nonnegative");
  const double q0 = (beta >= 0.0 ? 1.0 : -1.0) * std::sqrt(q0sq);
  const double x0 = y0 - 1.0 - q0sq;
  return RankOneModel2x2(std::move(spec), q0, x0);
}

double RankOneModel2x2::alpha1() const {
  const double y0 = 1.0 + x0_ + q0_ * q0_;
  return spec_.kappa(0) * (1.0 - x0_ - q0_ * q0_) / y0;
}

double RankOneModel2x2::alpha2() const {
  const double y0 = 1.0 + x0_ + q0_ * q0_;
  return -spec_.kappa(1) * (1.0 + x0_ - q0_ * q0_) / y0;
}

double RankOneModel2x2::beta() const {
  const double y0 = 1.0 + x0_ + q0_ * q0_;
  return 2.0 * q0_ * std::sqrt(spec_.kappa(0) * spec_.kappa(1)) / y0;
}

RealMatrix RankOneModel2x2::u0() const {
  RealMatrix m(2, 2);
  m << alpha1(), beta(), beta(), alpha2();
  return m;
}

RealMatrix RankOneModel2x2::superpotential(double r) const {
  const double k1 = spec_.kappa(0);
  const double k2 = spec_.kappa(1);
  const double q = q0_ * std::exp((k2 - k1) * r);
  const double x = x0_ * std::exp(-2.0 * k1 * r);
  const double y = 1.0 + x + q * q;
  RealMatrix u(2, 2);
  u(0, 0) = k1 * (1.0 - x - q * q) / y;
  u(1, 1) = -k2 * (1.0 + x - q * q) / y;
  u(0, 1) = u(1, 0) = 2.0 * q * std::sqrt(k1 * k2) / y;
  return u;
}

ComplexMatrix RankOneModel2x2::jost(const WaveNumbers& k) const {
  const double kap1 = spec_.kappa(0);
  const double kap2 = spec_.kappa(1);
  const double a1 = alpha1(), a2 = alpha2(), b = beta();
  const Complex k1 = k.value(0), k2 = k.value(1);
  ComplexMatrix f(2, 2);
  f(0, 0) = (a1 - kI * k1) / (kap1 - kI * k1);
  f(0, 1) = b / (kap1 - kI * k1);
  f(1, 0) = -b / (kap2 + kI * k2);
  f(1, 1) = -(a2 - kI * k2) / (kap2 + kI * k2);
  return f;
}

ComplexMatrix RankOneModel2x2::jost(double energy) const {
  return jost(channel_wavenumbers(energy, spec_.channels()));
}

JostFunction RankOneModel2x2::jost_function() const {
  RankOneModel2x2 copy = *this;
  return [copy](const WaveNumbers& k) { return copy.jost(k); };
}

ThreeChannelRank2Model::ThreeChannelRank2Model(FactorizationSpec spec, double q0, double x0)
    : spec_(std::move(spec)), q0_(q0), x0_(x0) {
  if (spec_.size() != 3)
    throw PreconditionViolated("ThreeChannelRank2Model: three channels required");
  if (!(spec_.kappa(0) > spec_.kappa(2) && spec_.kappa(2) > spec_.kappa(1)))
    throw PreconditionViolated(
        "ThreeChannelRank2Model: threshold order must give kappa1 > kappa3 > kappa2");
  if (!(q0_ * q0_ > x0_ * x0_ - 1.0))
    throw PreconditionViolated("ThreeChannelRank2Model: regularity requires q0^2 > x0^2 - 1");
}

double ThreeChannelRank2Model::det_sigma(double r) const {
  const double q = q0_ * std::exp((spec_.kappa(2) - spec_.kappa(0)) * r);
  const double x = x0_ * std::exp(-(spec_.kappa(0) + spec_.kappa(1)) * r);
  return 1.0 + q * q - x * x;
}

RealMatrix ThreeChannelRank2Model::superpotential(double r) const {
  const double k1 = spec_.kappa(0);
  const double k2 = spec_.kappa(1);
  const double k3 = spec_.kappa(2);
  const double q = q0_ * std::exp((k3 - k1) * r);
  const double x = x0_ * std::exp(-(k1 + k2) * r);
  const double det = 1.0 + q * q - x * x;

  RealMatrix core(3, 3);
  core << 1.0, -x, q, -x, 1.0 + q * q, -x * q, q, -x * q, q * q;

  RealVector kappa(3);
  kappa << k1, k2, k3;
  return RealMatrix((-kappa).asDiagonal()) + (2.0 / det) * sqrt_weight_sandwich(kappa, core);
}

RealVector ThreeChannelRank2Model::u_infinity() const {
  RealVector u(3);
  u << spec_.kappa(0), spec_.kappa(1), -spec_.kappa(2);
  return u;
}

double rank1_kappa2_root(double delta_gap, double alpha1, double alpha2, double beta) {
  const auto g = [&](double k2) {
    return (std::sqrt(delta_gap + k2 * k2) + alpha1) * (k2 + alpha2) - beta * beta;
  };
  // bracket the root by scanning outward
  double lo = 1e-9, hi = 0.0;
  double glo = g(lo);
  bool found = false;
  double step = 0.1;
  for (double k2 = step; k2 < 1e4; k2 += step) {
    const double gk = g(k2);
    if ((gk > 0.0) != (glo > 0.0)) {
      hi = k2;
      lo = k2 - step;
      found = true;
      break;
    }
    glo = gk;
    lo = k2;
    if (k2 > 10.0) step = 1.0;
  }
  if (!found) throw Error("rank1_kappa2_root: no sign change found while bracketing");

  glo = g(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

double resonance_energy_absdet(const JostFunction& jost, const ChannelSet& channels,
                               double e_lo, double e_hi, int n_grid) {
  if (!(e_hi > e_lo) || n_grid < 8)
    throw PreconditionViolated("resonance_energy_absdet: bad search window");
  const auto absdet = [&](double e) {
    return std::abs(jost(channel_wavenumbers(e, channels)).determinant());
  };

  double best_e = e_lo;
  double best_v = absdet(e_lo);
  for (int i = 1; i <= n_grid; ++i) {
    const double e = e_lo + (e_hi - e_lo) * static_cast<double>(i) / n_grid;
    const double v = absdet(e);
    if (v < best_v) {
      best_v = v;
      best_e = e;
    }
  }

  const double h = (e_hi - e_lo) / n_grid;
  double a = std::max(e_lo, best_e - h);
  double b = std::min(e_hi, best_e + h);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = absdet(c), fd = absdet(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * std::max(1.0, std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = absdet(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = absdet(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace ccsusy
