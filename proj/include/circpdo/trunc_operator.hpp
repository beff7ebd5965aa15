#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "circpdo/symbol.hpp"

namespace circpdo {

enum class Provenance { Quantized, Smoothing, Composite };

// Complex matrix on Fourier modes |k| <= K with r x r blocks. Mode m lives
// at block offset (m + K) * r. The Fourier basis e^{ikx}/sqrt(2 pi) is
// orthonormal, so the L2 adjoint is the conjugate transpose.
class TruncOperator {
public:
  TruncOperator(int K, int r, Provenance prov = Provenance::Composite);
  TruncOperator(int K, int r, Mat entries, Provenance prov = Provenance::Composite);

  static TruncOperator identity(int K, int r);
  static TruncOperator zero(int K, int r);

  int K() const { return K_; }
  int rank() const { return r_; }
  int dim() const { return (2 * K_ + 1) * r_; }
  Provenance provenance() const { return prov_; }
  void set_provenance(Provenance p) { prov_ = p; }

  const Mat& entries() const { return m_; }
  Mat& entries() { return m_; }

  Mat block(int m, int k) const;
  void set_block(int m, int k, const Mat& value);

  TruncOperator operator+(const TruncOperator& other) const;
  TruncOperator operator-(const TruncOperator& other) const;
  TruncOperator scaled(cplx factor) const;

  double norm() const { return m_.norm(); }
  double max_abs() const { return m_.size() ? m_.cwiseAbs().maxCoeff() : 0.0; }

private:
  int K_;
  int r_;
  Provenance prov_;
  Mat m_;

  void check_same_shape(const TruncOperator& other) const;
};

TruncOperator multiply(const TruncOperator& a, const TruncOperator& b);
TruncOperator adjoint(const TruncOperator& a);
TruncOperator commutator(const TruncOperator& a, const TruncOperator& b);
// singular value ratio; infinity for singular input
double condition_estimate(const TruncOperator& a);
// throws SingularMatrixError when the condition estimate exceeds the limit
TruncOperator inverse(const TruncOperator& a, double cond_limit = 1e12);
// exp(t v), the endpoint of the constant-velocity path
TruncOperator exp_path(const TruncOperator& v, double t);

// sign-of-frequency operator, block diag(sign(k) Id_r) with sign(0) = +1
TruncOperator epsilon(int K, int r);

// entry (m, k) = Fourier coefficient m-k of x -> sigma_a(x, k), where
// sigma_a(x, k) sums plus components against k^{order-j} for k > 0 and
// minus components against |k|^{order-j} for k < 0; at k = 0 only
// degree-0 plus components contribute. If warn is given it receives a
// message when K < a.mode_bound().
TruncOperator quantize(const FormalSymbol& a, int K,
                       std::string* warn = nullptr);

// Quantitative stand-in for the smoothing ideal at truncation.
struct DecayProfile {
  int p = 0;
  // max over the full matrix of (1+|m|+|k|)^p * block norm
  double s_p = 0.0;
  // per-antidiagonal block-norm maxima, s = |m|+|k| = 0..2K, full matrix
  std::vector<double> antidiag;
  // same restricted to the interior window |m|,|k| <= K/2
  std::vector<double> antidiag_window;
  // minus the log-log slope of the window maxima; +infinity for data that
  // is compactly supported inside the window or too sparse to fit
  double fitted_exponent = std::numeric_limits<double>::infinity();
};

DecayProfile decay_profile(const TruncOperator& a, int p);

// smoothing certification used by the property suites
inline bool smoothing_certified(const DecayProfile& d, double grade = 3.0) {
  return d.fitted_exponent >= grade;
}

struct BundleConfig {
  int defect_p = 4;
  double defect_threshold = 1e4;
  double cond_limit = 1e12;
  double smoothing_grade = 3.0;
};

// Compatible pair (formal symbol, truncated operator): the defect
// total - quantize(base) must be smoothing-sized, total must be invertible.
struct BundleElement {
  FormalSymbol base;
  TruncOperator total;
  DecayProfile defect;
};

BundleElement make_bundle_element(const FormalSymbol& a,
                                  const std::optional<TruncOperator>& R, int K,
                                  const BundleConfig& cfg = {});

}  // namespace circpdo
