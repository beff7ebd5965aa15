#include "doctest.h"

#include <cmath>

#include "circpdo/errors.hpp"
#include "circpdo/fredholm.hpp"
#include "circpdo/rng.hpp"
#include "circpdo/trunc_operator.hpp"
#include "circpdo/verify.hpp"

using namespace circpdo;

namespace {

Mat id1() { return Mat::Identity(1, 1); }

FormalSymbol mult_symbol(int n, int KX, int depth) {
  return FormalSymbol::multiplication(
      FourierFunction::harmonic(n, id1(), KX), depth);
}

}  // namespace

TEST_SUITE("operator") {

TEST_CASE("quantization of the reference symbols") {
  const int K = 4;

  SUBCASE("unit maps to the identity") {
    const TruncOperator q = quantize(FormalSymbol::unit(1, 4, 2), K);
    CHECK((q - TruncOperator::identity(K, 1)).max_abs() == 0.0);
  }

  SUBCASE("xi maps to the mode multiplier") {
    const TruncOperator q = quantize(FormalSymbol::xi(1, 4, 1), K);
    for (int m = -K; m <= K; ++m)
      for (int k = -K; k <= K; ++k)
        CHECK(std::abs(q.entries()(m + K, k + K) -
                       (m == k ? cplx(k, 0.0) : cplx(0.0, 0.0))) == 0.0);
  }

  SUBCASE("e^{ix} maps to the mode shift") {
    const TruncOperator q = quantize(mult_symbol(1, 4, 2), K);
    for (int m = -K; m <= K; ++m)
      for (int k = -K; k <= K; ++k)
        CHECK(std::abs(q.entries()(m + K, k + K) -
                       (m == k + 1 ? cplx(1.0, 0.0) : cplx(0.0, 0.0))) == 0.0);
  }

  SUBCASE("the k = 0 column takes only the degree-0 plus component") {
    // distinct constants on the two half-lines expose which one column
    // k = 0 reads from
    std::vector<HomogeneousPair> comps;
    FourierFunction p = FourierFunction::constant(2.0 * id1(), 2);
    FourierFunction m = FourierFunction::constant(5.0 * id1(), 2);
    comps.push_back({p, m});
    const FormalSymbol a(0, 1, 2, comps);
    const TruncOperator q = quantize(a, 3);
    CHECK(std::abs(q.entries()(3, 3) - 2.0) == 0.0);   // k = 0
    CHECK(std::abs(q.entries()(4, 4) - 2.0) == 0.0);   // k = 1, plus side
    CHECK(std::abs(q.entries()(2, 2) - 5.0) == 0.0);   // k = -1, minus side
  }
}

TEST_CASE("frequency sign operator") {
  const int K = 4;
  const TruncOperator e = epsilon(K, 1);
  for (int m = -K; m <= K; ++m)
    CHECK(std::abs(e.entries()(m + K, m + K) - cplx(m >= 0 ? 1.0 : -1.0, 0.0)) ==
          0.0);

  // the commutator with the shift concentrates at the sign flip
  const TruncOperator s1 = quantize(mult_symbol(1, 4, 2), K);
  const TruncOperator c = commutator(e, s1);
  CHECK(std::abs(c.entries()(K, K - 1) - 2.0) == 0.0);
  CHECK(c.norm() == 2.0);
}

TEST_CASE("adjoint commutes with quantization on banded data") {
  const FormalSymbol uxi = compose(mult_symbol(1, 4, 2),
                                   FormalSymbol::xi(1, 4, 2), 2);
  const FormalSymbol adj = adjoint_symbol(uxi, 2);
  const TruncOperator gap = quantize(adj, 12) - adjoint(quantize(uxi, 12));
  CHECK(gap.max_abs() == 0.0);
}

TEST_CASE("inverse and condition") {
  const int K = 2;
  const TruncOperator two = TruncOperator::identity(K, 1).scaled(2.0);
  CHECK((multiply(inverse(two), two) - TruncOperator::identity(K, 1)).max_abs() <
        1e-15);
  CHECK(condition_estimate(TruncOperator::identity(K, 1)) ==
        doctest::Approx(1.0));

  // diag(k) is singular at the zero mode
  const TruncOperator diag = quantize(FormalSymbol::xi(1, 2, 1), K);
  CHECK_THROWS_AS(inverse(diag), SingularMatrixError);
}

TEST_CASE("exponential path") {
  const int K = 1;
  const TruncOperator n = quantize(mult_symbol(1, 2, 1), K);
  const TruncOperator e0 = exp_path(n, 0.0);
  CHECK((e0 - TruncOperator::identity(K, 1)).max_abs() == 0.0);
  // nilpotent of index 3 at this truncation: exact polynomial
  const double t = 0.7;
  const TruncOperator et = exp_path(n, t);
  const TruncOperator want = TruncOperator::identity(K, 1) + n.scaled(t) +
                             multiply(n, n).scaled(0.5 * t * t);
  CHECK((et - want).max_abs() < 1e-14);
}

TEST_CASE("decay profile worked values") {
  // identity: antidiagonal s = 2|m| carries 1, so s_2 = (1 + 2K)^2
  const DecayProfile pid = decay_profile(TruncOperator::identity(4, 1), 2);
  CHECK(pid.s_p == 81.0);
  CHECK_FALSE(smoothing_certified(pid));

  // single entry of size 2 at distance 1 from the diagonal
  const TruncOperator s1 = quantize(mult_symbol(1, 4, 2), 4);
  const DecayProfile pc = decay_profile(commutator(epsilon(4, 1), s1), 3);
  CHECK(pc.s_p == 16.0);
  CHECK(pc.fitted_exponent == std::numeric_limits<double>::infinity());
  CHECK(smoothing_certified(pc));

  // seeded exponential decay clears the certification grade
  Rng rng(3);
  const DecayProfile ps = decay_profile(seeded_smoothing(rng, 8, 1), 4);
  CHECK(ps.fitted_exponent > 3.0);
}

TEST_CASE("order reduction of the raw multiplier") {
  const int K = 6;
  const TruncOperator diag = quantize(FormalSymbol::xi(1, 2, 1), K);
  const TruncOperator red = reduce_order_matrix(diag, 1);
  for (int k = -K; k <= K; ++k) {
    const double want = k / std::sqrt(1.0 + double(k) * k);
    CHECK(std::abs(red.entries()(k + K, k + K) - want) < 1e-15);
  }
}

TEST_CASE("bundle elements") {
  const int K = 6;
  const FormalSymbol one = FormalSymbol::unit(1, 4, 4);

  SUBCASE("no correction means the bare quantization") {
    const BundleElement el = make_bundle_element(one, std::nullopt, K);
    CHECK((el.total - TruncOperator::identity(K, 1)).max_abs() == 0.0);
    CHECK(el.defect.s_p == 0.0);
  }

  SUBCASE("smoothing corrections are accepted and profiled") {
    Rng rng(9);
    const TruncOperator R = seeded_smoothing(rng, K, 1, 0.1);
    const BundleElement el = make_bundle_element(one, R, K);
    CHECK((el.total - TruncOperator::identity(K, 1) - R).max_abs() < 1e-15);
    CHECK(el.defect.fitted_exponent > 3.0);
  }

  SUBCASE("a non-smoothing correction is rejected") {
    // epsilon has flat antidiagonals, far above any polynomial budget
    const TruncOperator R = epsilon(K, 1).scaled(50.0);
    CHECK_THROWS_AS(make_bundle_element(one, R, K), PreconditionError);
  }

  SUBCASE("a singular total is rejected") {
    const TruncOperator R = TruncOperator::identity(K, 1).scaled(-1.0);
    CHECK_THROWS_AS(make_bundle_element(one, R, K), SingularMatrixError);
  }
}

}  // TEST_SUITE
