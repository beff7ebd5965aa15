#include "doctest.h"

#include <cmath>

#include "circpdo/connection.hpp"
#include "circpdo/errors.hpp"
#include "circpdo/rng.hpp"
#include "circpdo/verify.hpp"

using namespace circpdo;

namespace {

TruncOperator sh(int n, int K) {
  return quantize(FormalSymbol::multiplication(
                      FourierFunction::harmonic(n, Mat::Identity(1, 1), 4), 2),
                  K);
}

}  // namespace

TEST_SUITE("connection") {

TEST_CASE("values at the identity") {
  const int K = 4;

  SUBCASE("commutator family on the shift") {
    const TruncOperator v = value_at_identity(eps_comm(K, 1), sh(1, K));
    CHECK(std::abs(v.entries()(K, K - 1) - cplx(-2.0, 0.0)) == 0.0);
    CHECK(v.norm() == 2.0);
  }

  SUBCASE("left smoothing family multiplies from the left") {
    Rng rng(21);
    const TruncOperator s = seeded_smoothing(rng, K, 1, 0.5);
    const TruncOperator a = TruncOperator::identity(K, 1);
    const ConnectionForm f = smooth_left(s, a);
    const TruncOperator v = sh(1, K);
    const TruncOperator got = value_at_identity(f, v);
    const TruncOperator want = multiply(multiply(multiply(s, a), adjoint(s)), v);
    CHECK((got - want).max_abs() < 1e-14);
  }

  SUBCASE("smoothing families reject a flat coefficient") {
    const TruncOperator flat = epsilon(K, 1).scaled(100.0);
    CHECK_THROWS_AS(smooth_left(flat, TruncOperator::identity(K, 1)),
                    PreconditionError);
  }
}

TEST_CASE("smoothing certification splits the families") {
  Rng rng(22);
  const int K = 12;
  const TruncOperator s = seeded_smoothing(rng, K, 1, 0.5);
  const TruncOperator a = seeded_group_element(rng, K, 1);
  const TruncOperator v = sh(1, K);

  for (const auto& f : {smooth_left(s, a), smooth_right(s, a),
                        smooth_bracket(s, a), eps_comm(K, 1)}) {
    const DecayProfile d = decay_profile(value_at_identity(f, v), 4);
    CHECK(smoothing_certified(d));
  }
  // the spectral projection keeps the whole tangent: order zero, not smoothing
  const DecayProfile bad =
      decay_profile(value_at_identity(half_plus(K, 1), v), 4);
  CHECK_FALSE(smoothing_certified(bad));
}

TEST_CASE("structure group covariance") {
  Rng rng(23);
  const int K = 8;
  const TruncOperator s = seeded_smoothing(rng, K, 1, 0.5);
  const TruncOperator a = seeded_group_element(rng, K, 1);
  const TruncOperator g = seeded_group_element(rng, K, 1);
  const TruncOperator h = seeded_group_element(rng, K, 1);
  const TruncOperator v = sh(1, K) + seeded_smoothing(rng, K, 1, 0.2);
  const std::vector<std::pair<TruncOperator, TruncOperator>> samples = {{g, v}};

  for (const auto& f :
       {smooth_left(s, a), smooth_right(s, a), smooth_bracket(s, a),
        eps_comm(K, 1), half_plus(K, 1)})
    CHECK(check_covariance(f, h, samples) < 1e-10);

  ConnectionForm corrupted = smooth_left(s, a);
  corrupted.extension = ExtensionRule::PlainRight;
  CHECK(check_covariance(corrupted, h, samples) > 1e-3);
}

TEST_CASE("curvature closed form") {
  const int K = 4;
  const TruncOperator a = sh(1, K), b = sh(-1, K);
  const TruncOperator om = curvature_closed_form(a, b);

  // single interior entry at the zero mode
  CHECK(std::abs(om.entries()(K, K) - cplx(-1.0, 0.0)) == 0.0);
  CHECK(om.norm() == 1.0);

  CHECK((curvature_closed_form(b, a) + om).max_abs() == 0.0);
  CHECK((curvature_closed_form(a.scaled(2.0), b) - om.scaled(2.0)).max_abs() <
        1e-14);
}

TEST_CASE("holonomy reproduces the curvature in both gauges") {
  const int K = 8;
  const TruncOperator a = sh(1, K), b = sh(-1, K);
  const ConnectionForm hp = half_plus(K, 1);
  const double h = 1e-2;

  HolonomyConfig hc;
  const TruncOperator om = curvature_closed_form(a, b);
  const TruncOperator hol = curvature_holonomy(hp, a, b, h, hc);
  CHECK((hol - om).norm() / (1.0 + om.norm()) < 1e-7);

  // the twisted gauge integrates the same loop to the conjugate convention
  hc.gauge = HolonomyGauge::AdTwistedExtension;
  const TruncOperator hol2 = curvature_holonomy(hp, a, b, h, hc);
  const Mat id = Mat::Identity(2 * K + 1, 2 * K + 1);
  const Mat p = 0.5 * (id + epsilon(K, 1).entries());
  const Mat pp = id - p;
  const Mat want = pp * a.entries() * p * b.entries() -
                   pp * b.entries() * p * a.entries();
  CHECK((hol2.entries() - want).norm() / (1.0 + want.norm()) < 1e-7);
}

TEST_CASE("wedge square combinatorics") {
  const int K = 6;
  const TruncOperator a = sh(1, K), b = sh(-1, K), c = sh(2, K), d = sh(-2, K);
  const CurvatureMap om = &curvature_closed_form;

  const TruncOperator w = wedge_square(om, a, b, c, d);
  // swapping within a slot pair flips the sign
  CHECK((wedge_square(om, b, a, c, d) + w).max_abs() < 1e-13);
  CHECK((wedge_square(om, a, b, d, c) + w).max_abs() < 1e-13);
  // a repeated argument kills every term
  CHECK(wedge_square(om, a, a, c, d).max_abs() == 0.0);
}

}  // TEST_SUITE
