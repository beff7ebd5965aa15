#include "doctest.h"

#include <cmath>

#include "circpdo/errors.hpp"
#include "circpdo/fredholm.hpp"
#include "circpdo/rng.hpp"
#include "circpdo/verify.hpp"

using namespace circpdo;

namespace {

TruncOperator zero_mode_projector(int K) {
  TruncOperator p = TruncOperator::zero(K, 1);
  p.set_block(0, 0, Mat::Identity(1, 1));
  return p;
}

}  // namespace

TEST_SUITE("fredholm") {

TEST_CASE("kernel and cokernel projectors") {
  const int K = 4;

  SUBCASE("the mode multiplier loses exactly the zero mode") {
    const TruncOperator A = quantize(FormalSymbol::xi(1, 2, 1), K);
    const KernelCokernel kc = kernel_cokernel(A);
    CHECK(kc.rank_K == 1);
    CHECK(kc.rank_I == 1);
    CHECK((kc.P_K - zero_mode_projector(K)).max_abs() < 1e-14);
    CHECK((kc.P_I - zero_mode_projector(K)).max_abs() < 1e-14);
    CHECK(kc.singular_values.front() == doctest::Approx(4.0));
  }

  SUBCASE("an invertible operator has empty projectors") {
    const KernelCokernel kc =
        kernel_cokernel(TruncOperator::identity(K, 1).scaled(3.0));
    CHECK(kc.rank_K == 0);
    CHECK(kc.P_K.max_abs() == 0.0);
  }

  SUBCASE("a singular value on the threshold is refused") {
    TruncOperator A = TruncOperator::zero(1, 1);
    A.set_block(-1, -1, Mat::Identity(1, 1));
    A.set_block(0, 0, Mat::Identity(1, 1) * 1e-8);
    A.set_block(1, 1, Mat::Identity(1, 1) * 0.5);
    CHECK_THROWS_AS(kernel_cokernel(A), ClusterError);
  }
}

TEST_CASE("numerical rank") {
  const int K = 2;
  CHECK(numerical_rank(TruncOperator::identity(K, 1)) == 5);
  CHECK(numerical_rank(zero_mode_projector(K)) == 1);
  CHECK(numerical_rank(TruncOperator::zero(K, 1)) == 0);
}

TEST_CASE("worked corrections") {
  SUBCASE("identity minus the zero-mode projector") {
    const int K = 4;
    const TruncOperator P0 = zero_mode_projector(K);
    const TruncOperator A = TruncOperator::identity(K, 1) - P0;
    const FredholmLift lift = lift_invertible_of_matrix(A);

    // (Id + P0)^{-1} (Id - P0) - Id = -P0: rank one, exactly
    CHECK((lift.defect_R + P0).max_abs() < 1e-15);
    CHECK(lift.defect_rank == 1);
    CHECK(lift.correction_rank == 1);
    CHECK(lift.rank_K == 1);
    CHECK(lift.rank_I == 1);
    CHECK(lift.retries == 0);
    CHECK(lift.lambda == cplx(1.0, 0.0));
    CHECK_FALSE(lift.degenerate);
    CHECK(lift.defect_profile.fitted_exponent ==
          std::numeric_limits<double>::infinity());
  }

  SUBCASE("the mode multiplier") {
    const TruncOperator A = quantize(FormalSymbol::xi(1, 2, 1), 4);
    const FredholmLift lift = lift_invertible_of_matrix(A);
    CHECK(lift.rank_K == 1);
    CHECK(lift.defect_rank == 1);
    CHECK((lift.defect_R + zero_mode_projector(4)).max_abs() < 1e-15);
  }

  SUBCASE("the zero operator is flagged degenerate") {
    const FredholmLift lift =
        lift_invertible_of_matrix(TruncOperator::zero(2, 1));
    CHECK(lift.degenerate);
    CHECK(lift.rank_K == 5);
    CHECK(lift.defect_rank == 5);
    CHECK(lift.correction_rank == 5);
  }

  SUBCASE("an unreachable condition limit exhausts the retries") {
    LiftConfig cfg;
    cfg.cond_limit = 0.5;  // nothing satisfies this
    cfg.max_retries = 2;
    CHECK_THROWS_AS(
        lift_invertible_of_matrix(TruncOperator::identity(2, 1), cfg),
        SingularMatrixError);
  }
}

TEST_CASE("symbol-level lift") {
  SUBCASE("rejects non-elliptic input") {
    const FormalSymbol u = FormalSymbol::multiplication(
        FourierFunction::harmonic(1, Mat::Identity(1, 1), 4), 4);
    CHECK_THROWS_AS(lift_invertible(u - u, 6), EllipticityError);
  }

  SUBCASE("nonzero order is funneled through order reduction") {
    const FormalSymbol xi = FormalSymbol::xi(1, 2, 1);
    const FredholmLift lift = lift_invertible(xi, 4);
    // after the multiplier reduction the kernel is still the zero mode
    CHECK(lift.rank_K == 1);
    CHECK(lift.defect_rank == 1);
    CHECK(condition_estimate(lift.A_prime) < 1e3);
  }

  SUBCASE("seeded elliptic symbols lift cleanly") {
    Rng rng(41);
    for (int i = 0; i < 5; ++i) {
      const FormalSymbol a = seeded_symbol(rng, 0, 1, 6, 4);
      const FredholmLift lift = lift_invertible(a, 8);
      CHECK(condition_estimate(lift.A_prime) < 1e12);
      CHECK(lift.defect_rank == lift.correction_rank);
      CHECK(lift.defect_profile.fitted_exponent >= 3.0);
    }
  }
}

}  // TEST_SUITE
