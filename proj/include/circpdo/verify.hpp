#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "circpdo/report.hpp"
#include "circpdo/rng.hpp"
#include "circpdo/symbol.hpp"
#include "circpdo/trunc_operator.hpp"

namespace circpdo {

struct VerifyParams {
  int K = 16;
  int depth = 4;
  // 0 keeps each check's pinned threshold; > 0 overrides residual bounds
  double tol = 0.0;
  std::uint64_t seed = 7;
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;
  std::string outcome;  // pass | fail | open-discrepancy

  bool pass() const { return all_pass(checks); }
};

// Deterministic generators shared by the suites. Coefficient support is
// kept small against the working resolution so truncation never bites and
// the exact-identity checks see only roundoff.
FormalSymbol seeded_symbol(Rng& rng, int order, int rank, int mode_bound,
                           int depth, int support = 2, double delta = 0.02,
                           bool elliptic = true);
TruncOperator seeded_smoothing(Rng& rng, int K, int r, double scale = 1.0);
TruncOperator seeded_group_element(Rng& rng, int K, int r);

SuiteResult verify_symbols(const VerifyParams& p = {});      // algebra + decay
SuiteResult verify_connections(const VerifyParams& p = {});  // values, covariance, curvature
SuiteResult verify_transport(const VerifyParams& p = {});    // projection, lift, holonomy
SuiteResult verify_fredholm(const VerifyParams& p = {});     // corrected inverses
SuiteResult verify_cocycle(const VerifyParams& p = {});      // traces, cohomology

std::vector<SuiteResult> verify_all(const VerifyParams& p = {});

}  // namespace circpdo
