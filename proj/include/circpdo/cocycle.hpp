#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "circpdo/connection.hpp"
#include "circpdo/symbol.hpp"

namespace circpdo {

struct CocycleConfig {
  int N_b = 6;               // multiplication basis e^{inx}, |n| <= N_b
  bool include_zeta = true;  // order-reduced derivative row
  int zeta_depth = 4;
  double stab_rel = 1e-8;    // K-doubling stabilization bound
};

// projector onto modes |m| <= window
TruncOperator mode_window_projector(int K, int r, int window);

// trace restricted to the interior window. Truncated traces of
// non-trace-class expressions are boundary-sensitive; all cocycle values go
// through this.
cplx windowed_trace(const TruncOperator& M, int window);

// P_W [a, b] P_W: the bracket the cochain machinery uses. Unmasked
// truncated commutators of shifts pick up spurious rank-one boundary terms.
TruncOperator masked_commutator(const TruncOperator& a, const TruncOperator& b,
                                int window);

// c_S(a,b) = (1/4) tr(eps [eps,a] [eps,b]) on the window K/2. The optional
// flag reports a window-halving stabilization proxy.
cplx schwinger(const TruncOperator& a, const TruncOperator& b,
               bool* stabilized = nullptr);

// tr(Omega(a,b) (1+eps)) on the window K/2
cplx curvature_trace(const TruncOperator& a, const TruncOperator& b,
                     bool* stabilized = nullptr);

// tr(wedge_square(Omega)(a,b,c,d) (1+eps)) on the window K/2
cplx four_cocycle_trace(const TruncOperator& a, const TruncOperator& b,
                        const TruncOperator& c, const TruncOperator& d,
                        bool* stabilized = nullptr);

// Basis kept at the symbol level so tables can be rebuilt at doubled K for
// the stabilization check.
struct BasisSpec {
  std::vector<std::string> names;
  std::vector<FormalSymbol> symbols;
};

BasisSpec default_basis_spec(int r, const CocycleConfig& cfg = {});
std::vector<TruncOperator> quantize_basis(const BasisSpec& spec, int K);

using PairFunctional =
    std::function<cplx(const TruncOperator&, const TruncOperator&)>;

struct CochainTable {
  std::vector<std::string> names;
  std::vector<TruncOperator> basis;
  Mat values;  // antisymmetric, verified at build time
  int K = 0;
  int window = 0;
  std::string normalization;
  bool stabilized = false;
  // direct evaluation off the table grid (same K); empty for values-only
  // tables, which then fall back to basis re-expansion
  PairFunctional generator;

  int size() const { return static_cast<int>(basis.size()); }
};

CochainTable schwinger_table(const BasisSpec& spec, int K,
                             const CocycleConfig& cfg = {});
CochainTable curvature_trace_table(const BasisSpec& spec, int K,
                                   const CocycleConfig& cfg = {});

CochainTable scaled_table(const CochainTable& c, double nu);

// evaluation convention for solved functionals: lambda(Y) = tr(lambda_matrix Y)
cplx apply_functional(const Mat& lambda_matrix, const TruncOperator& Y);

// c + (coboundary of mu), mu in the tr(mu . ) convention above
CochainTable add_coboundary(const CochainTable& c, const Mat& mu);

struct CocycleCheck {
  double residual = 0.0;            // max |c([x,y],z) - c([x,z],y) + c([y,z],x)|
  double expansion_residual = 0.0;  // worst bracket re-expansion defect
};

// Jacobi-type closedness over all basis triples. Values-only tables
// re-expand brackets in the basis and throw when that fails; tables with a
// generator evaluate directly and the expansion defect is diagnostic.
CocycleCheck cocycle_residual(const CochainTable& c);

struct CoboundarySolve {
  Mat lambda_matrix;                // lambda(Y) = tr(lambda_matrix Y)
  // l2 misfit over basis pairs, relative to the larger of the two table
  // scales (not to c1 - c2, which can be pure cancellation dust)
  double residual = 0.0;
  double misfit_max = 0.0;          // absolute max misfit over basis pairs
  double expansion_residual = 0.0;  // diagnostic, see cocycle_residual
  std::vector<cplx> on_basis;       // lambda evaluated on each basis element
};

// least squares for (c1 - c2)(x_i, x_j) = lambda([x_i, x_j]) over the
// masked brackets; the minimal-norm solution is the Riesz representative on
// the bracket span
CoboundarySolve coboundary_solve(const CochainTable& c1,
                                 const CochainTable& c2);

struct Certificate {
  double best_misfit = 0.0;  // max-norm misfit of the best coboundary fit
  double c_scale = 0.0;      // max |c(i,j)|
  bool pass = false;         // best_misfit >= 0.1 * c_scale and c != 0
  bool degenerate = false;   // c identically zero
  CoboundarySolve fit;
};

Certificate nontriviality_certificate(const CochainTable& c);

struct FourTable {
  std::vector<std::string> names;
  std::vector<TruncOperator> basis;
  std::vector<cplx> values;  // flat B^4, fully antisymmetric
  int K = 0;
  int window = 0;
  bool stabilized = false;

  int size() const { return static_cast<int>(basis.size()); }
  cplx value(int i, int j, int k, int l) const;
};

FourTable four_cocycle_table(const BasisSpec& spec, int K,
                             const CocycleConfig& cfg = {});

struct Certificate4 {
  double best_misfit = 0.0;
  double c_scale = 0.0;
  bool pass = false;
  bool degenerate = false;
  double expansion_residual = 0.0;
};

// best fit by coboundaries of antisymmetric 3-cochains on the basis span
Certificate4 nontriviality_certificate4(const FourTable& c);

struct CohomologousReport {
  double best_residual = std::numeric_limits<double>::infinity();
  double best_nu = 0.0;
  std::vector<std::pair<double, double>> scanned;  // (nu, residual)
  bool cohomologous = false;  // best_residual <= 1e-6
  CoboundarySolve best_fit;
};

// coboundary_solve between the curvature-trace table and nu * Schwinger
// over the normalization grid {+-1, +-1/2, +-1/4, +-2}; a residual floor
// above 1e-6 everywhere is reported as an open discrepancy, not an error
CohomologousReport cohomologous_experiment(const BasisSpec& spec, int K,
                                           const CocycleConfig& cfg = {});

}  // namespace circpdo
