#include <cmath>
#include <random>

#include "ccsusy/errors.hpp"
#include "ccsusy/models.hpp"
#include "ccsusy/susy_transform.hpp"
#include "ccsusy/wronskian.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace ccsusy;
using namespace ccsusy::test;

TEST_CASE("factorization spec validation") {
  ChannelSet ch({10.0, 0.0});
  CHECK_THROWS_AS(FactorizationSpec(ch, 0.0), ConfigError);  // not strictly below
  const FactorizationSpec spec(ch, -9.0);
  CHECK(spec.kappa(0) == doctest::Approx(std::sqrt(19.0)).epsilon(1e-15));
  CHECK(spec.kappa(1) == 3.0);

  const FactorizationSpec from_k = FactorizationSpec::from_kappa(ch, {std::sqrt(19.0), 3.0});
  CHECK(from_k.energy() == doctest::Approx(-9.0).epsilon(1e-12));
  CHECK_THROWS_AS(FactorizationSpec::from_kappa(ch, {1.0, 3.0}), ConfigError);
  CHECK(FactorizationSpec::from_kappa_of(ch, 1, 3.0).energy() == -9.0);
}

TEST_CASE("factorization solution from origin data") {
  const FactorizationSpec spec = fig_spec(3.0);

  SUBCASE("pure growing exponential for U(0) = kappa") {
    const U0Parametrization p(spec.kappa_diag());
    for (double r : {0.0, 0.5, 2.0}) {
      auto [s, ds] = sigma_from_u0(p, spec, r);
      for (int i = 0; i < 2; ++i) {
        CHECK(s(i, i) == doctest::Approx(std::exp(spec.kappa(i) * r)).epsilon(1e-14));
        CHECK(ds(i, i) ==
              doctest::Approx(spec.kappa(i) * std::exp(spec.kappa(i) * r)).epsilon(1e-14));
      }
      CHECK(std::abs(s(0, 1)) == 0.0);
    }
  }

  SUBCASE("pure decaying exponential for U(0) = -kappa") {
    const U0Parametrization p(RealMatrix(-spec.kappa_diag()));
    auto [s, ds] = sigma_from_u0(p, spec, 1.3);
    // cosh - sinh cancels; the achievable absolute error scales with cosh
    const double floor = 1e-13 * std::cosh(spec.kappa_max() * 1.3);
    for (int i = 0; i < 2; ++i)
      CHECK(std::abs(s(i, i) - std::exp(-spec.kappa(i) * 1.3)) < floor);
    CHECK(max_norm(RealMatrix(ds + spec.kappa_diag() * s)) < spec.kappa_max() * floor);
  }

  SUBCASE("origin boundary values") {
    std::mt19937 rng(3);
    const U0Parametrization p(random_symmetric(2, rng, 2.0));
    auto [s, ds] = sigma_from_u0(p, spec, 0.0);
    CHECK(max_norm(RealMatrix(s - RealMatrix::Identity(2, 2))) == 0.0);
    CHECK(max_norm(RealMatrix(ds - p.u0())) == 0.0);
  }
}

TEST_CASE("superpotential from origin data") {
  const FactorizationSpec spec = fig_spec(3.0);

  SUBCASE("constant for U(0) = kappa") {
    const U0Parametrization p(spec.kappa_diag());
    for (double r : {0.0, 1.0, 3.0})
      CHECK(max_norm(RealMatrix(superpotential_from_u0(p, spec, r) - spec.kappa_diag())) <
            1e-13);
  }

  SUBCASE("off-diagonal element is beta over det sigma") {
    const U0Parametrization p(fig_u0());
    const CoxModel2x2 cox(spec, -2.0, -2.0, 0.6);
    for (double r : {0.3, 1.0, 2.5}) {
      const RealMatrix u = superpotential_from_u0(p, spec, r);
      CHECK(u(0, 1) == doctest::Approx(0.6 / cox.det_sigma(r)).epsilon(1e-12));
    }
  }

  SUBCASE("matches the independent closed form at r = 1") {
    const U0Parametrization p(fig_u0());
    const CoxModel2x2 cox(spec, -2.0, -2.0, 0.6);
    CHECK(max_norm(RealMatrix(superpotential_from_u0(p, spec, 1.0) - cox.superpotential(1.0))) <
          1e-12);
  }

  SUBCASE("symmetry on random admissible parametrizations") {
    std::mt19937 rng(11);
    int built = 0;
    while (built < 12) {
      const RealMatrix u0 = random_symmetric(2, rng, 3.0);
      try {
        const TransformResult tr = make_transform(spec, U0Parametrization(u0));
        for (double r : {0.1, 0.9, 2.2, 5.0})
          CHECK(symmetry_defect(tr.superpotential(r)) < 1e-10);
        ++built;
      } catch (const SingularSigma&) {
        // singular parametrization: rejected by design, draw again
      }
    }
  }
}

TEST_CASE("transformed potential identity") {
  const FactorizationSpec spec = fig_spec(3.0);

  SUBCASE("trivial transform leaves the zero potential") {
    const U0Parametrization p(spec.kappa_diag());
    for (double r : {0.0, 1.0, 4.0, 8.0})
      CHECK(max_norm(transformed_potential(p, spec, r)) < 1e-12);
  }

  SUBCASE("frozen origin value for the coupled example") {
    const U0Parametrization p(fig_u0());
    RealMatrix expected(2, 2);
    expected << -29.28, -4.8, -4.8, -9.28;
    CHECK(max_norm(RealMatrix(transformed_potential(p, spec, 0.0) - expected)) < 1e-12);
  }

  SUBCASE("agrees with -2 dU/dr under grid refinement at second order") {
    const U0Parametrization p(fig_u0());
    const auto u_of_r = [&](double r) { return superpotential_from_u0(p, spec, r); };
    const double r = 1.2;
    const RealMatrix v = transformed_potential(p, spec, r);
    const auto err_at = [&](double h) {
      const RealMatrix du = (u_of_r(r + h) - u_of_r(r - h)) / (2.0 * h);
      return max_norm(RealMatrix(v + 2.0 * du));
    };
    const double e1 = err_at(1e-2);
    const double e2 = err_at(5e-3);
    CHECK(e1 / e2 > 3.0);  // second-order central difference
    CHECK(e2 < 1e-3);
  }

  SUBCASE("exponential tail bound") {
    const U0Parametrization p(fig_u0());
    const TransformResult tr = make_transform(spec, p);
    const double gamma = 2.0 * spec.kappa_min();
    const double c = max_norm(tr.potential(1.0)) * std::exp(gamma);
    for (double r : {2.0, 3.0, 4.0})
      CHECK(max_norm(tr.potential(r)) <= c * std::exp(-gamma * r) * 1.5);
  }
}

TEST_CASE("transformed Jost matrix") {
  const FactorizationSpec spec = fig_spec(3.0);

  SUBCASE("identity for the trivial transform") {
    const TransformResult tr = make_transform(spec, U0Parametrization(spec.kappa_diag()));
    for (double e : {-5.0, 3.0, 12.0})
      CHECK(max_norm(ComplexMatrix(tr.jost(e) - ComplexMatrix::Identity(2, 2))) < 1e-12);
  }

  SUBCASE("coupled rank-2 example matches the printed matrix") {
    const TransformResult tr = make_transform(spec, U0Parametrization(fig_u0()));
    const CoxModel2x2 cox(spec, -2.0, -2.0, 0.6);
    for (double e : {1.0, 6.3, 12.0, 19.0})
      CHECK(max_norm(ComplexMatrix(tr.jost(e) - cox.jost(e))) < 1e-13);
  }

  SUBCASE("rank-1 example flips the sign structure of the second row") {
    const double kappa2 = rank1_kappa2_root(10.0, -2.0, -2.0, 0.6);
    const FactorizationSpec spec3 = fig_spec(kappa2);
    const RankOneModel2x2 model = RankOneModel2x2::from_u0(spec3, -2.0, -2.0, 0.6);
    RealMatrix q0(1, 1), x0(1, 1);
    q0 << model.q0();
    x0 << model.x0();
    const TransformResult tr =
        make_transform(spec3, CanonicalParametrization(spec3, {0}, q0, x0));
    for (double e : {2.0, 12.0, 18.0})
      CHECK(max_norm(ComplexMatrix(tr.jost(e) - model.jost(e))) < 1e-12);
  }

  SUBCASE("general initial-data overload reduces to the zero-potential form") {
    const TransformResult tr = make_transform(spec, U0Parametrization(fig_u0()));
    const JostFunction f_init = [](const WaveNumbers& k) {
      return ComplexMatrix(ComplexMatrix::Identity(k.size(), k.size()));
    };
    const JostFunction g_init = [](const WaveNumbers& k) {
      return ComplexMatrix(Complex(0.0, -1.0) * k.as_diagonal());
    };
    const WaveNumbers k = channel_wavenumbers(7.0, spec.channels());
    const ComplexMatrix general =
        transformed_jost_general(tr.u_at_origin(), tr.u_infinity(), f_init, g_init, k);
    CHECK(max_norm(ComplexMatrix(general - tr.jost(k))) < 1e-14);
  }
}

TEST_CASE("transformed Jost solution") {
  const FactorizationSpec spec = fig_spec(3.0);

  SUBCASE("plane wave for the trivial transform") {
    const TransformResult tr = make_transform(spec, U0Parametrization(spec.kappa_diag()));
    const WaveNumbers k = channel_wavenumbers(12.0, spec.channels());
    const ComplexMatrix f = tr.jost_solution(k, 1.7);
    for (int i = 0; i < 2; ++i)
      CHECK(std::abs(f(i, i) - std::exp(Complex(0, 1) * k.value(i) * 1.7)) < 1e-13);
  }

  SUBCASE("tends to the free asymptotic basis") {
    const TransformResult tr = make_transform(spec, U0Parametrization(fig_u0()));
    const WaveNumbers k = channel_wavenumbers(12.0, spec.channels());
    double prev = 1e300;
    for (double r : {2.0, 4.0, 6.0, 8.0}) {
      ComplexMatrix dev = tr.jost_solution(k, r);
      for (int j = 0; j < 2; ++j) dev.col(j) *= std::exp(Complex(0, -1) * k.value(j) * r);
      const double d = max_norm(ComplexMatrix(dev - ComplexMatrix::Identity(2, 2)));
      CHECK(d < prev);
      prev = d;
    }
    CHECK(prev < 1e-9);
  }

  SUBCASE("transposed origin value reproduces the Jost matrix") {
    std::mt19937 rng(17);
    int built = 0;
    while (built < 10) {
      try {
        const TransformResult tr =
            make_transform(spec, U0Parametrization(random_symmetric(2, rng, 2.5)));
        for (double e : {-3.0, 4.0, 15.0}) {
          const WaveNumbers k = channel_wavenumbers(e, spec.channels());
          CHECK(max_norm(ComplexMatrix(tr.jost_solution(k, 0.0).transpose() - tr.jost(k))) <
                1e-10);
        }
        ++built;
      } catch (const SingularSigma&) {
      }
    }
  }
}

TEST_CASE("intertwining: transformed plane waves solve the new equation") {
  const FactorizationSpec spec = fig_spec(3.0);
  const TransformResult tr = make_transform(spec, U0Parametrization(fig_u0()));
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> re(0.4, 5.0);
  std::uniform_real_distribution<double> ee(0.5, 20.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double r = re(rng);
    const double e = ee(rng);
    const WaveNumbers k = channel_wavenumbers(e, spec.channels());
    const ComplexMatrix ik = Complex(0, 1) * k.as_diagonal();
    const auto transformed_wave = [&](double rr) {
      ComplexMatrix wave = ComplexMatrix::Zero(2, 2);
      for (int i = 0; i < 2; ++i) wave(i, i) = std::exp(Complex(0, 1) * k.value(i) * rr);
      return ComplexMatrix((tr.superpotential(rr).cast<Complex>() - ik) * wave);
    };
    const ComplexMatrix g = transformed_wave(r);
    const ComplexMatrix d2g = second_derivative(transformed_wave, r, 5e-3);
    const ComplexMatrix residual =
        d2g + k.as_diagonal() * k.as_diagonal() * g - tr.potential(r).cast<Complex>() * g;
    CHECK(max_norm(residual) / std::max(1.0, max_norm(g)) < 1e-6);
  }
}

TEST_CASE("solutions at the factorization energy") {
  const FactorizationSpec spec = fig_spec(3.0);

  SUBCASE("decaying exponential for the trivial transform") {
    const U0Parametrization p(spec.kappa_diag());
    const auto sol = solution_at_factorization_energy(p, spec, 1.1, 0.0);
    for (int i = 0; i < 2; ++i)
      CHECK(std::abs(sol.phi.value(i, i) - std::exp(-spec.kappa(i) * 1.1)) < 1e-13);
  }

  SUBCASE("pair Wronskian is minus the identity") {
    const U0Parametrization p(fig_u0());
    for (double r : {0.4, 1.0, 2.3}) {
      const auto sol = solution_at_factorization_energy(p, spec, r, 0.0);
      const ComplexMatrix w = wronskian(sol.phi, sol.psi);
      CHECK(max_norm(ComplexMatrix(w + ComplexMatrix::Identity(2, 2))) < 1e-9);
    }
  }

  SUBCASE("both solutions satisfy the transformed equation") {
    const U0Parametrization p(fig_u0());
    const auto phi_of = [&](double r) {
      return RealMatrix(solution_at_factorization_energy(p, spec, r, 0.0).phi.value.real());
    };
    const auto psi_of = [&](double r) {
      return RealMatrix(solution_at_factorization_energy(p, spec, r, 0.0).psi.value.real());
    };
    const RealMatrix kappa2 = spec.kappa_vector().cwiseProduct(spec.kappa_vector()).asDiagonal();
    for (double r : {0.8, 1.6}) {
      const RealMatrix v = transformed_potential(p, spec, r);
      const RealMatrix res_phi =
          second_derivative_real(phi_of, r, 5e-3) - (v + kappa2) * phi_of(r);
      CHECK(max_norm(res_phi) / std::max(1.0, max_norm(phi_of(r))) < 1e-6);
      const RealMatrix res_psi =
          second_derivative_real(psi_of, r, 5e-3) - (v + kappa2) * psi_of(r);
      CHECK(max_norm(res_psi) / std::max(1.0, max_norm(psi_of(r))) < 1e-6);
    }
  }

  SUBCASE("canonical route gives the same superpotential and identities") {
    const U0Parametrization p(fig_u0());
    RealMatrix c2, d2;
    jost_basis_coefficients(p, spec, &c2, &d2);
    const Canonicalization canon = canonicalize(c2, d2, spec);
    CHECK(max_norm(RealMatrix(superpotential_from_u0(p, spec, 1.5) -
                              superpotential_canonical(canon.param, spec, 1.5))) < 1e-12);
    const auto sol = solution_at_factorization_energy(canon.param, spec, 1.5, 0.5);
    CHECK(max_norm(ComplexMatrix(wronskian(sol.phi, sol.psi) +
                                 ComplexMatrix::Identity(2, 2))) < 1e-9);
  }
}

TEST_CASE("asymptotic diagonal of the superpotential") {
  const FactorizationSpec spec = fig_spec(3.0);

  SUBCASE("full rank gives +kappa") {
    const AsymptoticForm asym = u_at_infinity(U0Parametrization(spec.kappa_diag()), spec);
    CHECK(asym.rank == 2);
    CHECK((asym.u_inf - spec.kappa_vector()).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("rank zero gives -kappa and a trivial potential") {
    const AsymptoticForm asym =
        u_at_infinity(U0Parametrization(RealMatrix(-spec.kappa_diag())), spec);
    CHECK(asym.rank == 0);
    CHECK((asym.u_inf + spec.kappa_vector()).cwiseAbs().maxCoeff() == 0.0);
    const TransformResult tr =
        make_transform(spec, U0Parametrization(RealMatrix(-spec.kappa_diag())));
    for (double r : {0.0, 2.0, 6.0}) CHECK(max_norm(tr.potential(r)) < 1e-12);
  }

  SUBCASE("exponential approach with the expected rate for full rank") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
      const RealMatrix u0 = spec.kappa_diag() + random_symmetric(2, rng, 0.4);
      const TransformResult tr = make_transform(spec, U0Parametrization(u0));
      REQUIRE(tr.rank() == 2);
      const RealMatrix u_inf = RealMatrix(tr.u_infinity().asDiagonal());
      std::vector<double> rs, logs;
      for (double r = 0.5; r <= 4.0; r += 0.25) {
        const double nrm = max_norm(RealMatrix(tr.superpotential(r) - u_inf));
        if (nrm > 1e-13 && nrm < 1e-1) {
          rs.push_back(r);
          logs.push_back(std::log(nrm));
        }
      }
      REQUIRE(rs.size() >= 4);
      CHECK(fit_slope(rs, logs) < -0.9 * 2.0 * spec.kappa_min());
    }
  }

  SUBCASE("mixed rank decays strictly") {
    const double kappa2 = rank1_kappa2_root(10.0, -2.0, -2.0, 0.6);
    const FactorizationSpec spec3 = fig_spec(kappa2);
    const RankOneModel2x2 model = RankOneModel2x2::from_u0(spec3, -2.0, -2.0, 0.6);
    RealMatrix q0(1, 1), x0(1, 1);
    q0 << model.q0();
    x0 << model.x0();
    const TransformResult tr =
        make_transform(spec3, CanonicalParametrization(spec3, {0}, q0, x0));
    CHECK(tr.u_infinity()(0) == doctest::Approx(spec3.kappa(0)).epsilon(1e-14));
    CHECK(tr.u_infinity()(1) == doctest::Approx(-spec3.kappa(1)).epsilon(1e-14));
    const RealMatrix u_inf = RealMatrix(tr.u_infinity().asDiagonal());
    std::vector<double> rs, logs;
    for (double r = 1.0; r <= 7.0; r += 0.5) {
      rs.push_back(r);
      logs.push_back(std::log(max_norm(RealMatrix(tr.superpotential(r) - u_inf))));
    }
    CHECK(fit_slope(rs, logs) < -0.5);
  }
}

TEST_CASE("singular parametrizations are rejected at construction") {
  ChannelSet ch({0.0});
  const FactorizationSpec spec(ch, -1.0);
  RealMatrix u0(1, 1);
  u0 << -1.5;  // sigma = cosh r - 1.5 sinh r crosses zero
  CHECK_THROWS_AS(make_transform(spec, U0Parametrization(u0)), SingularSigma);

  bool threw = false;
  try {
    superpotential_from_u0(U0Parametrization(u0), spec, std::atanh(1.0 / 1.5));
  } catch (const SingularSigma& e) {
    threw = true;
    CHECK(e.radius == doctest::Approx(std::atanh(1.0 / 1.5)).epsilon(1e-10));
  }
  CHECK(threw);
}
