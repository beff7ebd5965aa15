#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "circpdo/trunc_operator.hpp"

namespace circpdo {

enum class Family { SmoothLeft, SmoothRight, SmoothBracket, EpsComm, HalfPlus };

// How a value at a general base point is produced from the value at the
// identity. AdTwisted is the rule satisfying the structure-group covariance
// equation identically; PlainRight is the deliberately corrupted control
// used by the covariance negative test.
enum class ExtensionRule { AdTwisted, PlainRight };

// Interpretation of the two-argument family formulas for the Smooth*
// families: ParamsTangent fixes (s, a) as parameters and takes the remaining
// slot as the tangent argument; TangentWithBase reads the first slot as the
// tangent and the second as the base point, giving a base-dependent form
// with no separate extension step.
enum class ArgReading { ParamsTangent, TangentWithBase };

struct ConnectionConfig {
  int smoothing_p = 4;
  double smoothing_threshold = 1e4;
};

struct ConnectionForm {
  Family family;
  int K = 0;
  int r = 1;
  std::optional<TruncOperator> s;  // Smooth* families
  std::optional<TruncOperator> a;  // Smooth* families
  ExtensionRule extension = ExtensionRule::AdTwisted;
  ArgReading reading = ArgReading::ParamsTangent;
};

ConnectionForm smooth_left(const TruncOperator& s, const TruncOperator& a,
                           const ConnectionConfig& cfg = {});
ConnectionForm smooth_right(const TruncOperator& s, const TruncOperator& a,
                            const ConnectionConfig& cfg = {});
ConnectionForm smooth_bracket(const TruncOperator& s, const TruncOperator& a,
                              const ConnectionConfig& cfg = {});
ConnectionForm eps_comm(int K, int r);
ConnectionForm half_plus(int K, int r);

TruncOperator value_at_identity(const ConnectionForm& form,
                                const TruncOperator& v);

// value at base point g; g must be invertible
TruncOperator value_at(const ConnectionForm& form, const TruncOperator& g,
                       const TruncOperator& v);

// max over samples (g, v) of the relative norm of
// theta_{gh}(v h) - h^{-1} theta_g(v) h
double check_covariance(
    const ConnectionForm& form, const TruncOperator& h,
    const std::vector<std::pair<TruncOperator, TruncOperator>>& samples);

// HalfPlus curvature: (p b p') a - (p a p') b with p = (1+eps)/2. The sign
// is pinned by the holonomy cross-check, not chosen freely.
TruncOperator curvature_closed_form(const TruncOperator& a,
                                    const TruncOperator& b);

// Gauge used when turning the loop holonomy into a curvature matrix: the
// transport ODE coefficient is either theta at the identity applied to the
// left-logarithmic velocity, or theta at the moving point applied to the
// plain velocity through the extension rule. The two gauges see different
// loop expansions; each converges to its own algebraic curvature, and the
// loop orientation below is fixed per gauge so the limit carries + sign.
enum class HolonomyGauge { LeftLogarithmic, AdTwistedExtension };

struct HolonomyConfig {
  HolonomyGauge gauge = HolonomyGauge::LeftLogarithmic;
  int substeps = 64;        // RK4 substeps per loop side
  int richardson_levels = 2;  // 0: raw, 1: one elimination, 2: two
};

// Richardson-extrapolated (hol(h) - Id)/h^2 for the square loop spanned by
// the flows of a and b.
TruncOperator curvature_holonomy(const ConnectionForm& form,
                                 const TruncOperator& a,
                                 const TruncOperator& b, double h,
                                 const HolonomyConfig& cfg = {});

using CurvatureMap =
    std::function<TruncOperator(const TruncOperator&, const TruncOperator&)>;

// Full antisymmetrization (1/4) sum_sigma sgn(sigma)
// Omega(s1,s2) Omega(s3,s4), evaluated through the equivalent six-term form.
TruncOperator wedge_square(const CurvatureMap& omega, const TruncOperator& a,
                           const TruncOperator& b, const TruncOperator& c,
                           const TruncOperator& d);

}  // namespace circpdo
