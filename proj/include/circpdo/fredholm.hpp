#pragma once

#include <cstdint>
#include <vector>

#include "circpdo/symbol.hpp"
#include "circpdo/trunc_operator.hpp"

namespace circpdo {

// Numerical kernel/cokernel of a truncated operator: orthogonal projectors
// onto the singular subspaces below a relative threshold.
struct KernelCokernel {
  TruncOperator P_K;  // right singular vectors, sigma < threshold
  TruncOperator P_I;  // left singular vectors, sigma < threshold
  std::vector<double> singular_values;  // descending
  double threshold = 0.0;               // absolute value actually used
  int rank_K = 0;
  int rank_I = 0;
};

// Throws ClusterError when a singular value sits within 10 eps sigma_max of
// the threshold: the split is then not stable and the caller must move tau.
KernelCokernel kernel_cokernel(const TruncOperator& A, double tau_rel = 1e-8);

// singular values above tau_rel * sigma_max
int numerical_rank(const TruncOperator& A, double tau_rel = 1e-8);

// left-multiplies by diag((1 + k^2)^{-o/2}) over the mode index, bringing an
// order-o quantization down to order 0
TruncOperator reduce_order_matrix(const TruncOperator& A, int o);

struct LiftConfig {
  cplx lambda{1.0, 0.0};
  cplx mu{1.0, 0.0};
  double tau_rel = 1e-8;
  double cond_limit = 1e12;
  int max_retries = 8;
  // the correction coefficients are real by default; complex draws are
  // opt-in since the construction never needs them on these examples
  bool complex_retries = false;
  std::uint64_t retry_seed = 2026;
  int defect_p = 4;
};

struct FredholmLift {
  TruncOperator A_prime;
  TruncOperator defect_R;  // inverse(A') * A - Id, finite rank
  DecayProfile defect_profile;
  int defect_rank = 0;
  int correction_rank = 0;  // rank of lambda P_I + mu P_K
  int rank_K = 0;
  int rank_I = 0;
  cplx lambda{1.0, 0.0};
  cplx mu{1.0, 0.0};
  bool degenerate = false;  // kernel filled the whole space
  int retries = 0;
};

// A' = A + lambda P_I + mu P_K, retried with fresh uniform coefficients in
// [1/2, 2] until the condition estimate clears cfg.cond_limit. Throws
// SingularMatrixError when the retries run out.
FredholmLift lift_invertible_of_matrix(const TruncOperator& A,
                                       const LiftConfig& cfg = {});

// Quantizes and lifts. Nonzero orders are first funneled through
// reduce_order_matrix. Requires ellipticity of the leading part.
FredholmLift lift_invertible(const FormalSymbol& a, int K,
                             const LiftConfig& cfg = {});

}  // namespace circpdo
