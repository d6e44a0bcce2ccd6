#include "ccsusy/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ccsusy/errors.hpp"

namespace ccsusy {

namespace {

constexpr Complex kI{0.0, 1.0};

RealVector k_squared(double energy, const ChannelSet& channels) {
  RealVector k2(channels.size());
  for (int i = 0; i < channels.size(); ++i) k2(i) = energy - channels.threshold(i);
  return k2;
}

/// Classic fixed-step RK4 on phi'' = W(r) phi for matrix-valued phi.
/// Calls `record(step_index, r, phi, dphi)` at every node.
template <typename Mat>
void rk4_integrate(const std::function<RealMatrix(double)>& w_of_r, Mat& phi, Mat& dphi,
                   double r0, double h, long n_steps,
                   const std::function<void(long, double, const Mat&, const Mat&)>& record) {
  RealMatrix w_lo = w_of_r(r0);
  record(0, r0, phi, dphi);
  for (long s = 0; s < n_steps; ++s) {
    const double r = r0 + h * static_cast<double>(s);
    const RealMatrix w_mid = w_of_r(r + 0.5 * h);
    const RealMatrix w_hi = w_of_r(r + h);

    const Mat k1p = dphi;
    const Mat k1d = w_lo * phi;
    const Mat k2p = dphi + 0.5 * h * k1d;
    const Mat k2d = w_mid * (phi + 0.5 * h * k1p);
    const Mat k3p = dphi + 0.5 * h * k2d;
    const Mat k3d = w_mid * (phi + 0.5 * h * k2p);
    const Mat k4p = dphi + h * k3d;
    const Mat k4d = w_hi * (phi + h * k3p);

    phi += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    dphi += (h / 6.0) * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
    w_lo = w_hi;

    if ((s & 63) == 0 && max_norm(phi) > 1e250) {
      std::ostringstream os;
      os << "integrator: solution norm exceeded overflow guard at r = " << r + h
         << "; reduce the step or the radius";
      throw StepUnstable(os.str());
    }
    record(s + 1, r + h, phi, dphi);
  }
}

long aligned_steps(double r_max, double step) {
  if (!(step > 0.0)) throw ConfigError("IntegrationConfig.step must be positive");
  if (!(r_max > 0.0)) throw ConfigError("IntegrationConfig.r_max must be positive");
  return std::max(1L, std::lround(r_max / step));
}

}  // namespace

IntegrationConfig default_integration_config(double kappa_max, double energy, double r_max,
                                             double step_factor) {
  IntegrationConfig cfg;
  const double speed = std::max({kappa_max, std::sqrt(std::max(energy, 0.0)), 1.0});
  const double raw = 1.0 / (step_factor * speed);
  const long n = aligned_steps(r_max, raw);
  cfg.r_max = r_max;
  cfg.step = r_max / static_cast<double>(n);
  return cfg;
}

RegularSolutionTrace integrate_regular(const PotentialFunction& potential, double energy,
                                       const ChannelSet& channels, const IntegrationConfig& cfg,
                                       const std::vector<double>& checkpoints) {
  const int n = channels.size();
  const long n_steps = aligned_steps(cfg.r_max, cfg.step);
  const double h = cfg.r_max / static_cast<double>(n_steps);
  const RealVector k2 = k_squared(energy, channels);
  const auto w_of_r = [&](double r) {
    return RealMatrix(potential(r) - RealMatrix(k2.asDiagonal()));
  };

  std::set<long> want;
  for (double c : checkpoints) {
    const long idx = std::clamp(std::lround(c / h), 0L, n_steps);
    want.insert(idx);
  }
  want.insert(n_steps);

  RegularSolutionTrace trace;
  trace.energy = energy;

  if (cfg.method == IntegrationMethod::rk4) {
    RealMatrix phi = RealMatrix::Zero(n, n);
    RealMatrix dphi = RealMatrix::Identity(n, n);
    const std::function<void(long, double, const RealMatrix&, const RealMatrix&)> record =
        [&](long s, double r, const RealMatrix& p, const RealMatrix& dp) {
          if (want.count(s))
            trace.samples.push_back(RegularSolutionTrace::Sample{r, p, dp});
        };
    rk4_integrate<RealMatrix>(w_of_r, phi, dphi, 0.0, h, n_steps, record);
    return trace;
  }

  // Numerov: phi_{j+1} solves (I - T_{j+1}) phi_{j+1} = (2I + 10 T_j) phi_j
  //                            - (I - T_{j-1}) phi_{j-1},  T = h^2/12 W.
  // The first node comes from a few RK4 substeps; derivatives use the
  // O(h^4) central formula with the equation's own second derivative, so one
  // extra node beyond r_max is integrated.
  const long total = n_steps + 1;  // exclusive upper node index
  std::vector<RealMatrix> phi_hist(3);
  std::vector<RealMatrix> w_hist(3);

  RealMatrix phi0 = RealMatrix::Zero(n, n);
  RealMatrix dphi0 = RealMatrix::Identity(n, n);
  {
    const std::function<void(long, double, const RealMatrix&, const RealMatrix&)> noop =
        [](long, double, const RealMatrix&, const RealMatrix&) {};
    rk4_integrate<RealMatrix>(w_of_r, phi0, dphi0, 0.0, h / 4.0, 4, noop);
  }

  std::vector<RealMatrix> nodes(static_cast<std::size_t>(total) + 1);
  nodes[0] = RealMatrix::Zero(n, n);
  nodes[1] = phi0;
  std::vector<RealMatrix> ws(static_cast<std::size_t>(total) + 1);
  ws[0] = w_of_r(0.0);
  ws[1] = w_of_r(h);
  const double h2_12 = h * h / 12.0;
  for (long j = 1; j < total; ++j) {
    ws[static_cast<std::size_t>(j + 1)] = w_of_r(h * static_cast<double>(j + 1));
    const RealMatrix a = RealMatrix::Identity(n, n) - h2_12 * ws[static_cast<std::size_t>(j + 1)];
    const RealMatrix rhs =
        (2.0 * RealMatrix::Identity(n, n) + 10.0 * h2_12 * ws[static_cast<std::size_t>(j)]) *
            nodes[static_cast<std::size_t>(j)] -
        (RealMatrix::Identity(n, n) - h2_12 * ws[static_cast<std::size_t>(j - 1)]) *
            nodes[static_cast<std::size_t>(j - 1)];
    nodes[static_cast<std::size_t>(j + 1)] = a.lu().solve(rhs);
    if ((j & 63) == 0 && max_norm(nodes[static_cast<std::size_t>(j + 1)]) > 1e250)
      throw StepUnstable("integrator: solution norm exceeded overflow guard");
  }
  for (long s : want) {
    if (s == 0) {
      trace.samples.push_back(
          RegularSolutionTrace::Sample{0.0, RealMatrix::Zero(n, n), RealMatrix::Identity(n, n)});
      continue;
    }
    // interior derivative from neighbors (node total = r_max + h exists)
    const auto& pm = nodes[static_cast<std::size_t>(s - 1)];
    const auto& pp = nodes[static_cast<std::size_t>(s + 1)];
    const RealMatrix dphi =
        (pp - pm) / (2.0 * h) -
        (h / 12.0) * (ws[static_cast<std::size_t>(s + 1)] * pp -
                      ws[static_cast<std::size_t>(s - 1)] * pm);
    trace.samples.push_back(RegularSolutionTrace::Sample{
        h * static_cast<double>(s), nodes[static_cast<std::size_t>(s)], dphi});
  }
  return trace;
}

namespace {

void check_match_conditions(double energy, const ChannelSet& channels,
                            const IntegrationConfig& cfg, double v_tail_norm) {
  if (v_tail_norm > cfg.match_tolerance) {
    std::ostringstream os;
    os << "extract_jost: ||V(r_max)|| = " << v_tail_norm << " exceeds match tolerance "
       << cfg.match_tolerance << "; increase r_max";
    throw IllConditionedMatch(os.str(), v_tail_norm / cfg.match_tolerance);
  }
  const WaveNumbers k = channel_wavenumbers(energy, channels);
  double worst = 0.0;
  for (int i = 0; i < k.size(); ++i) worst = std::max(worst, k.value(i).imag());
  const double cond = std::exp(worst * cfg.r_max);
  if (cond > 1e8) {
    std::ostringstream os;
    os << "extract_jost: closed-channel growth makes the match ill-conditioned (estimate "
       << cond << "); restrict to energies above all thresholds or lower r_max";
    throw IllConditionedMatch(os.str(), cond);
  }
}

}  // namespace

std::pair<ComplexMatrix, ComplexMatrix> extract_jost_pair(const RegularSolutionTrace& trace,
                                                          const ChannelSet& channels,
                                                          const IntegrationConfig& cfg,
                                                          double v_tail_norm) {
  check_match_conditions(trace.energy, channels, cfg, v_tail_norm);
  const auto& fin = trace.final_sample();
  const WaveNumbers k = channel_wavenumbers(trace.energy, channels);
  const int n = channels.size();
  ComplexMatrix f_plus(n, n), f_minus(n, n);
  for (int i = 0; i < n; ++i) {
    const Complex ki = k.value(i);
    const Complex grow = std::exp(kI * ki * fin.r);
    const Complex decay = std::exp(-kI * ki * fin.r);
    for (int j = 0; j < n; ++j) {
      f_plus(i, j) = grow * (fin.dphi(i, j) - kI * ki * fin.phi(i, j));
      f_minus(i, j) = decay * (fin.dphi(i, j) + kI * ki * fin.phi(i, j));
    }
  }
  return {std::move(f_plus), std::move(f_minus)};
}

ComplexMatrix extract_jost(const RegularSolutionTrace& trace, const ChannelSet& channels,
                           const IntegrationConfig& cfg, double v_tail_norm) {
  return extract_jost_pair(trace, channels, cfg, v_tail_norm).first;
}

SMatrixPoint oracle_smatrix(const PotentialFunction& potential, double energy,
                            const ChannelSet& channels, const IntegrationConfig& cfg) {
  const double v_tail = max_norm(potential(cfg.r_max));
  const RegularSolutionTrace trace = integrate_regular(potential, energy, channels, cfg);
  auto [f_plus, f_minus] = extract_jost_pair(trace, channels, cfg, v_tail);
  return s_matrix_from_jost(f_plus, f_minus, channel_wavenumbers(energy, channels), channels);
}

std::vector<std::pair<double, ComplexMatrix>> oracle_jost_solution(
    const PotentialFunction& potential, double energy, const ChannelSet& channels,
    const IntegrationConfig& cfg, const std::vector<double>& radii) {
  const int n = channels.size();
  const long n_steps = aligned_steps(cfg.r_max, cfg.step);
  const double h = cfg.r_max / static_cast<double>(n_steps);
  const RealVector k2 = k_squared(energy, channels);
  const auto w_of_r = [&](double r) {
    return RealMatrix(potential(r) - RealMatrix(k2.asDiagonal()));
  };
  const WaveNumbers k = channel_wavenumbers(energy, channels);

  std::set<long> want;
  for (double c : radii) want.insert(std::clamp(std::lround(c / h), 0L, n_steps));
  const long lowest = want.empty() ? n_steps : *want.begin();

  ComplexMatrix f = ComplexMatrix::Zero(n, n);
  ComplexMatrix df = ComplexMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    f(i, i) = std::exp(kI * k.value(i) * cfg.r_max);
    df(i, i) = kI * k.value(i) * f(i, i);
  }

  std::vector<std::pair<double, ComplexMatrix>> out;
  const std::function<void(long, double, const ComplexMatrix&, const ComplexMatrix&)> record =
      [&](long s, double r, const ComplexMatrix& value, const ComplexMatrix&) {
        const long node = n_steps - s;  // integrating downward
        if (want.count(node)) out.emplace_back(r, value);
      };
  rk4_integrate<ComplexMatrix>(w_of_r, f, df, cfg.r_max, -h, n_steps - lowest, record);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::vector<double> bound_state_scan(const JostFunction& jost, const ChannelSet& channels,
                                     double e_min, double e_max, int n_grid) {
  if (!(e_max < channels.min_threshold()))
    throw PreconditionViolated("bound_state_scan: e_max must lie below all thresholds");
  if (!(e_min < e_max) || n_grid < 2)
    throw PreconditionViolated("bound_state_scan: bad scan range");

  const auto det_at = [&](double e) {
    const ComplexMatrix f = jost(channel_wavenumbers(e, channels));
    return f.determinant().real();
  };

  std::vector<double> es(static_cast<std::size_t>(n_grid) + 1);
  std::vector<double> ds(static_cast<std::size_t>(n_grid) + 1);
  for (int i = 0; i <= n_grid; ++i) {
    double e = e_min + (e_max - e_min) * static_cast<double>(i) / n_grid;
    double d = det_at(e);
    if (!std::isfinite(d)) {  // grid point on a pole; nudge it
      e += 1e-9 * (e_max - e_min);
      d = det_at(e);
    }
    es[static_cast<std::size_t>(i)] = e;
    ds[static_cast<std::size_t>(i)] = d;
  }

  std::vector<double> found;
  for (int i = 0; i < n_grid; ++i) {
    const double da = ds[static_cast<std::size_t>(i)];
    const double db = ds[static_cast<std::size_t>(i + 1)];
    if (!std::isfinite(da) || !std::isfinite(db)) continue;
    if (std::abs(da) < 1e-14) {
      found.push_back(es[static_cast<std::size_t>(i)]);
      continue;
    }
    if ((da > 0.0) == (db > 0.0)) continue;

    double lo = es[static_cast<std::size_t>(i)], hi = es[static_cast<std::size_t>(i + 1)];
    double dlo = da;
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      const double dm = det_at(mid);
      if (!std::isfinite(dm)) break;
      if ((dm > 0.0) == (dlo > 0.0)) {
        lo = mid;
        dlo = dm;
      } else {
        hi = mid;
      }
    }
    const double root = 0.5 * (lo + hi);
    // a simple zero shrinks |det| with the bracket; a pole blows it up
    if (std::abs(det_at(root)) < 1e-6) found.push_back(root);
  }
  return found;
}

double observed_convergence_order(const PotentialFunction& potential, double energy,
                                  const ChannelSet& channels, const IntegrationConfig& cfg,
                                  double v_tail_norm) {
  IntegrationConfig c1 = cfg;
  IntegrationConfig c2 = cfg;
  IntegrationConfig c3 = cfg;
  c2.step = 0.5 * cfg.step;
  c3.step = 0.25 * cfg.step;
  const ComplexMatrix f1 =
      extract_jost(integrate_regular(potential, energy, channels, c1), channels, c1, v_tail_norm);
  const ComplexMatrix f2 =
      extract_jost(integrate_regular(potential, energy, channels, c2), channels, c2, v_tail_norm);
  const ComplexMatrix f3 =
      extract_jost(integrate_regular(potential, energy, channels, c3), channels, c3, v_tail_norm);
  const double e1 = max_norm(ComplexMatrix(f1 - f2));
  const double e2 = max_norm(ComplexMatrix(f2 - f3));
  if (e2 == 0.0) return 16.0;
  return std::log2(e1 / e2);
}

}  // namespace ccsusy
