#include "doctest.h"

#include <cmath>

#include "circpdo/cocycle.hpp"
#include "circpdo/errors.hpp"
#include "circpdo/rng.hpp"
#include "circpdo/trunc_operator.hpp"

using namespace circpdo;

namespace {

TruncOperator harmonic_op(int n, int K) {
  const int K_x = std::max(std::abs(n), 2);
  return quantize(FormalSymbol::multiplication(
                      FourierFunction::harmonic(n, Mat::Identity(1, 1), K_x),
                      2),
                  K);
}

}  // namespace

TEST_SUITE("cocycle") {

TEST_CASE("window projector and windowed trace") {
  const TruncOperator P = mode_window_projector(4, 1, 2);
  CHECK((multiply(P, P) - P).max_abs() == 0.0);
  CHECK(windowed_trace(TruncOperator::identity(4, 1), 2) == cplx(5.0));
  // frequency signs on modes -2..2, with the zero mode counted positive
  CHECK(windowed_trace(epsilon(4, 1), 2) == cplx(1.0));
  CHECK(windowed_trace(TruncOperator::identity(4, 1), 0) == cplx(1.0));
}

TEST_CASE("masked commutator drops the truncation boundary") {
  const int K = 8;
  const TruncOperator S1 = harmonic_op(1, K);
  const TruncOperator Sm1 = harmonic_op(-1, K);
  // plain truncated shifts do not commute: corner defects at modes +-K
  CHECK(commutator(S1, Sm1).max_abs() == 1.0);
  CHECK(masked_commutator(S1, Sm1, K / 2).max_abs() == 0.0);
}

TEST_CASE("pair values") {
  const int K = 12;

  SUBCASE("opposite harmonics give minus the mode number") {
    for (int m = 1; m <= 3; ++m) {
      bool stable = false;
      const cplx v = schwinger(harmonic_op(m, K), harmonic_op(-m, K), &stable);
      CHECK(std::abs(v - cplx(-double(m))) < 1e-13);
      CHECK(stable);
    }
  }

  SUBCASE("non-opposite harmonics vanish") {
    CHECK(std::abs(schwinger(harmonic_op(1, K), harmonic_op(2, K))) == 0.0);
    CHECK(std::abs(schwinger(harmonic_op(1, K), harmonic_op(1, K))) == 0.0);
  }

  SUBCASE("curvature pairing is alternating") {
    const TruncOperator U1 = harmonic_op(1, K);
    CHECK(std::abs(curvature_trace(U1, U1)) == 0.0);
  }

  SUBCASE("shape mismatch is refused") {
    CHECK_THROWS_AS(schwinger(harmonic_op(1, 4), harmonic_op(-1, 6)),
                    PreconditionError);
  }
}

TEST_CASE("basis spec") {
  CocycleConfig cfg;
  cfg.N_b = 2;
  const BasisSpec spec = default_basis_spec(1, cfg);
  REQUIRE(spec.names.size() == 6);
  CHECK(spec.names.front() == "u(-2)");
  CHECK(spec.names[3] == "u(1)");
  CHECK(spec.names.back() == "zeta");

  CocycleConfig bad = cfg;
  bad.N_b = -1;
  CHECK_THROWS_AS(default_basis_spec(1, bad), PreconditionError);
}

TEST_CASE("cochain tables") {
  CocycleConfig cfg;
  cfg.N_b = 2;
  const BasisSpec spec = default_basis_spec(1, cfg);
  const int K = 8;
  const CochainTable t = schwinger_table(spec, K, cfg);

  SUBCASE("layout and frozen entries") {
    CHECK(t.K == K);
    CHECK(t.window == 4);
    CHECK(t.size() == 6);
    // names order u(-2), u(-1), u(0), u(1), u(2), zeta
    CHECK(std::abs(t.values(3, 1) - cplx(-1.0)) < 1e-13);
    CHECK(std::abs(t.values(4, 0) - cplx(-2.0)) < 1e-13);
    CHECK(t.values(2, 2) == cplx(0.0));
    CHECK(t.stabilized);
  }

  SUBCASE("table agrees with its generator") {
    REQUIRE(t.generator);
    for (int i = 0; i < t.size(); ++i)
      for (int j = 0; j < t.size(); ++j) {
        if (i == j) continue;
        CHECK(std::abs(t.generator(t.basis[i], t.basis[j]) - t.values(i, j)) <
              1e-14);
      }
  }

  SUBCASE("scaling") {
    const CochainTable s = scaled_table(t, -0.5);
    CHECK(std::abs(s.values(3, 1) - cplx(0.5)) < 1e-13);
    REQUIRE(s.generator);
    CHECK(std::abs(s.generator(t.basis[3], t.basis[1]) - cplx(0.5)) < 1e-13);
  }

  SUBCASE("closedness on basis triples") {
    CHECK(cocycle_residual(t).residual < 1e-8);
    CHECK(cocycle_residual(curvature_trace_table(spec, K, cfg)).residual <
          1e-8);
  }

  SUBCASE("too small a basis for triples is refused") {
    CocycleConfig tiny;
    tiny.N_b = 0;
    tiny.include_zeta = false;
    const CochainTable t1 = schwinger_table(default_basis_spec(1, tiny), 4,
                                            tiny);
    CHECK_THROWS_AS(cocycle_residual(t1), PreconditionError);
  }
}

TEST_CASE("coboundary solve") {
  CocycleConfig cfg;
  cfg.N_b = 2;
  const BasisSpec spec = default_basis_spec(1, cfg);
  const int K = 8;
  const CochainTable t = schwinger_table(spec, K, cfg);

  SUBCASE("identical tables solve to the zero functional") {
    const CoboundarySolve fit = coboundary_solve(t, t);
    CHECK(fit.residual == 0.0);
    CHECK(fit.misfit_max == 0.0);
    CHECK(fit.lambda_matrix.cwiseAbs().maxCoeff() == 0.0);
    for (const cplx& v : fit.on_basis) CHECK(std::abs(v) == 0.0);
  }

  SUBCASE("a planted coboundary is recovered on the bracket span") {
    Rng rng(19);
    const int D = (2 * K + 1) * 1;
    Mat mu(D, D);
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) mu(i, j) = rng.cgaussian();
    const CochainTable shifted = add_coboundary(t, mu);
    const CoboundarySolve fit = coboundary_solve(shifted, t);
    CHECK(fit.residual < 1e-10);
    CHECK(fit.misfit_max < 1e-10);
    // the minimal-norm representative matches mu against every masked bracket
    for (int i = 0; i < t.size(); ++i)
      for (int j = i + 1; j < t.size(); ++j) {
        const TruncOperator br =
            masked_commutator(t.basis[i], t.basis[j], t.window);
        CHECK(std::abs(apply_functional(fit.lambda_matrix, br) -
                       apply_functional(mu, br)) < 1e-10);
      }
  }

  SUBCASE("mismatched truncations are refused") {
    const CochainTable t12 = schwinger_table(spec, 12, cfg);
    CHECK_THROWS_AS(coboundary_solve(t, t12), PreconditionError);
  }
}

TEST_CASE("pair nontriviality certificate") {
  CocycleConfig cfg;
  cfg.N_b = 3;
  cfg.include_zeta = false;
  const BasisSpec spec = default_basis_spec(1, cfg);
  const Certificate cert = nontriviality_certificate(schwinger_table(spec, 12,
                                                                     cfg));
  CHECK_FALSE(cert.degenerate);
  CHECK(cert.c_scale == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(cert.best_misfit >= 0.1 * cert.c_scale);
  CHECK(cert.pass);
}

TEST_CASE("normalization scan against the pair cocycle") {
  CocycleConfig cfg;
  cfg.N_b = 2;
  const BasisSpec spec = default_basis_spec(1, cfg);
  const CohomologousReport rep = cohomologous_experiment(spec, 12, cfg);
  CHECK(rep.scanned.size() == 8);
  CHECK(rep.best_nu == 2.0);
  CHECK(rep.best_residual < 1e-8);
  CHECK(rep.cohomologous);
}

TEST_CASE("four-argument pairing") {
  const int K = 8;
  CocycleConfig cfg;
  cfg.N_b = 2;
  const BasisSpec spec = default_basis_spec(1, cfg);

  SUBCASE("repeated arguments vanish exactly") {
    const TruncOperator a = harmonic_op(1, K), b = harmonic_op(-1, K),
                        c = harmonic_op(2, K);
    CHECK(std::abs(four_cocycle_trace(a, a, b, c)) == 0.0);
    CHECK(std::abs(four_cocycle_trace(a, b, a, c)) == 0.0);
  }

  SUBCASE("table matches direct evaluation and is antisymmetric") {
    const FourTable t = four_cocycle_table(spec, K, cfg);
    REQUIRE(t.size() == 6);
    const auto& b = t.basis;
    for (int i = 0; i < 3; ++i)
      for (int j = 3; j < 6; ++j) {
        const cplx direct = four_cocycle_trace(b[0], b[1], b[i + 2], b[j]);
        CHECK(std::abs(t.value(0, 1, i + 2, j) - direct) < 1e-12);
      }
    CHECK(std::abs(t.value(0, 1, 2, 3) + t.value(1, 0, 2, 3)) < 1e-12);
    CHECK(std::abs(t.value(0, 1, 2, 2)) == 0.0);
  }

  SUBCASE("the default table is degenerate and fails certification") {
    const FourTable t = four_cocycle_table(spec, K, cfg);
    double scale = 0.0;
    for (const cplx& v : t.values) scale = std::max(scale, std::abs(v));
    CHECK(scale == 0.0);
    const Certificate4 cert = nontriviality_certificate4(t);
    CHECK(cert.degenerate);
    CHECK_FALSE(cert.pass);
  }
}

}  // TEST_SUITE
