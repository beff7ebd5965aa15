#pragma once

#include <vector>

#include "circpdo/connection.hpp"

namespace circpdo {

enum class DerivMode { Analytic, CentralFD };

// Path of truncated operators on a strictly increasing time grid. When the
// derivative mode is CentralFD node derivatives come from second-order
// finite differences on the (possibly nonuniform) grid.
struct PathSample {
  std::vector<double> t;
  std::vector<TruncOperator> value;
  std::vector<TruncOperator> deriv;  // used when mode == Analytic
  DerivMode mode = DerivMode::CentralFD;

  static PathSample with_derivatives(std::vector<double> t,
                                     std::vector<TruncOperator> value,
                                     std::vector<TruncOperator> deriv);
  static PathSample finite_difference(std::vector<double> t,
                                      std::vector<TruncOperator> value);

  int nodes() const { return static_cast<int>(t.size()); }
  TruncOperator derivative(int i) const;
  void validate() const;
};

struct TransportConfig {
  double tol = 1e-8;       // horizontality residual bound
  int substeps = 8;        // initial RK4 substeps per node interval
  int max_substeps = 1024;
  bool adaptive = true;    // doubling until the step-doubling indicator
  double ode_tol = 1e-10;  // accepts the integration
};

struct TransportResult {
  PathSample path;
  double residual = 0.0;
  int substeps_used = 0;
};

// max over nodes of ||theta_{path(t)}(path'(t))|| / (1 + ||path'(t)||)
double horizontality_residual(const ConnectionForm& form,
                              const PathSample& path);

// Integrates g' = -theta_{gamma(t)}(gamma'(t)) g, g = Id at the first node,
// and returns gamma * g with matching derivatives. Throws ToleranceError
// when the residual bound cannot be met at the substep cap, with the
// achieved residual attached.
TransportResult horizontal_project(const ConnectionForm& form,
                                   const PathSample& gamma,
                                   const TransportConfig& cfg = {});

// max node relative norm of H(gamma h) - H(gamma) h
double equivariance_check(const ConnectionForm& form, const PathSample& gamma,
                          const TruncOperator& h,
                          const TransportConfig& cfg = {});

struct SymbolPath {
  std::vector<double> t;
  std::vector<FormalSymbol> x;
};

struct LiftResult {
  SymbolPath base;           // returned unchanged: the projection is exact
  PathSample path;
  double residual = 0.0;
  int substeps_used = 0;
  std::vector<DecayProfile> node_defects;  // path(i) - quantize(base(i))
};

// Quantizes the base path, corrects it so the first node equals
// start.total, and projects horizontally.
LiftResult horizontal_lift(const ConnectionForm& form, const SymbolPath& base,
                           const BundleElement& start,
                           const TransportConfig& cfg = {},
                           const BundleConfig& bundle_cfg = {});

// Star-shaped chart data: straight-line paths from the center, rejected
// when any interior sample loses ellipticity.
struct RadialMap {
  FormalSymbol center;
  int nodes = 9;

  SymbolPath path_to(const FormalSymbol& x) const;
};

// Phi(x, g) = (lift of the radial path to x)(1) . g
BundleElement local_trivialize(const ConnectionForm& form, const RadialMap& rad,
                               const FormalSymbol& x, const TruncOperator& g,
                               const TransportConfig& cfg = {},
                               const BundleConfig& bundle_cfg = {});

}  // namespace circpdo
