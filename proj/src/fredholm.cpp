#include "circpdo/fredholm.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "circpdo/errors.hpp"
#include "circpdo/rng.hpp"

namespace circpdo {

KernelCokernel kernel_cokernel(const TruncOperator& A, double tau_rel) {
  if (!(tau_rel > 0.0)) throw PreconditionError("threshold must be positive");
  Eigen::BDCSVD<Mat> svd(A.entries(),
                         Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const int dim = static_cast<int>(sigma.size());
  const double smax = dim ? sigma(0) : 0.0;
  const double tau = std::max(tau_rel * smax, 1e-300);

  const double eps = std::numeric_limits<double>::epsilon();
  for (int i = 0; i < dim; ++i)
    if (std::abs(sigma(i) - tau) < 10.0 * eps * smax)
      throw ClusterError("threshold falls inside a singular-value cluster");

  Mat pk = Mat::Zero(dim, dim), pi = Mat::Zero(dim, dim);
  int rank = 0;
  for (int i = 0; i < dim; ++i) {
    if (sigma(i) < tau) {
      pk += svd.matrixV().col(i) * svd.matrixV().col(i).adjoint();
      pi += svd.matrixU().col(i) * svd.matrixU().col(i).adjoint();
      ++rank;
    }
  }
  return KernelCokernel{TruncOperator(A.K(), A.rank(), std::move(pk)),
                        TruncOperator(A.K(), A.rank(), std::move(pi)),
                        std::vector<double>(sigma.data(), sigma.data() + dim),
                        tau, rank, rank};
}

int numerical_rank(const TruncOperator& A, double tau_rel) {
  Eigen::BDCSVD<Mat> svd(A.entries());
  const auto& sigma = svd.singularValues();
  if (sigma.size() == 0) return 0;
  const double cut = tau_rel * sigma(0);
  int rank = 0;
  for (int i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cut && sigma(i) > 0.0) ++rank;
  return rank;
}

TruncOperator reduce_order_matrix(const TruncOperator& A, int o) {
  if (o == 0) return A;
  TruncOperator out = A;
  const int K = A.K(), r = A.rank();
  for (int m = -K; m <= K; ++m) {
    const double scale = std::pow(1.0 + double(m) * double(m), -0.5 * o);
    out.entries().middleRows((m + K) * r, r) *= scale;
  }
  return out;
}

FredholmLift lift_invertible_of_matrix(const TruncOperator& A,
                                       const LiftConfig& cfg) {
  const KernelCokernel kc = kernel_cokernel(A, cfg.tau_rel);
  const int dim = (2 * A.K() + 1) * A.rank();

  Rng rng(cfg.retry_seed);
  cplx lambda = cfg.lambda, mu = cfg.mu;
  double last_cond = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      lambda = cplx(rng.uniform(0.5, 2.0),
                    cfg.complex_retries ? rng.uniform(0.5, 2.0) : 0.0);
      mu = cplx(rng.uniform(0.5, 2.0),
                cfg.complex_retries ? rng.uniform(0.5, 2.0) : 0.0);
    }
    const TruncOperator corr = kc.P_I.scaled(lambda) + kc.P_K.scaled(mu);
    const TruncOperator A_prime = A + corr;
    last_cond = condition_estimate(A_prime);
    if (!(last_cond < cfg.cond_limit)) continue;

    // inverse(A') A - Id collapses algebraically to -inverse(A') corr; the
    // latter vanishes exactly when no correction was needed, instead of
    // leaving a full-rank sheet of roundoff
    TruncOperator R =
        multiply(inverse(A_prime, cfg.cond_limit), corr).scaled(-1.0);
    DecayProfile profile = decay_profile(R, cfg.defect_p);
    const int defect_rank = numerical_rank(R, 1e-10);
    const int corr_rank = numerical_rank(corr, 1e-10);
    return FredholmLift{A_prime,      std::move(R), std::move(profile),
                        defect_rank,  corr_rank,    kc.rank_K,
                        kc.rank_I,    lambda,       mu,
                        kc.rank_K == dim,           attempt};
  }
  throw SingularMatrixError("no invertible correction within the retry budget",
                            last_cond);
}

FredholmLift lift_invertible(const FormalSymbol& a, int K,
                             const LiftConfig& cfg) {
  double bad = 0.0;
  if (!a.elliptic_at_order0(&bad))
    throw EllipticityError("symbol is not elliptic", bad);
  TruncOperator A = quantize(a, K);
  if (a.order() != 0) A = reduce_order_matrix(A, a.order());
  return lift_invertible_of_matrix(A, cfg);
}

}  // namespace circpdo
