#include "circpdo/trunc_operator.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace circpdo {

namespace {

// integer power with exact repeated multiplication; negative exponents go
// through the reciprocal so k^d and 1/k^{-d} agree bitwise
double ipow(double base, int e) {
  if (e < 0) return 1.0 / ipow(base, -e);
  double v = 1.0;
  for (int l = 0; l < e; ++l) v *= base;
  return v;
}

double block_norm(const Mat& b) {
  if (b.rows() == 1 && b.cols() == 1) return std::abs(b(0, 0));
  Eigen::JacobiSVD<Mat> svd(b);
  return svd.singularValues()(0);
}

}  // namespace

TruncOperator::TruncOperator(int K, int r, Provenance prov)
    : K_(K), r_(r), prov_(prov) {
  if (K < 1) throw PreconditionError("mode bound K must be positive");
  if (r < 1) throw PreconditionError("rank must be positive");
  m_ = Mat::Zero(dim(), dim());
}

TruncOperator::TruncOperator(int K, int r, Mat entries, Provenance prov)
    : K_(K), r_(r), prov_(prov), m_(std::move(entries)) {
  if (K < 1) throw PreconditionError("mode bound K must be positive");
  if (r < 1) throw PreconditionError("rank must be positive");
  if (m_.rows() != dim() || m_.cols() != dim())
    throw PreconditionError("entry matrix has the wrong dimension");
  if (!m_.allFinite()) throw PreconditionError("entries must be finite");
}

TruncOperator TruncOperator::identity(int K, int r) {
  TruncOperator a(K, r);
  a.m_ = Mat::Identity(a.dim(), a.dim());
  return a;
}

TruncOperator TruncOperator::zero(int K, int r) { return TruncOperator(K, r); }

Mat TruncOperator::block(int m, int k) const {
  if (std::abs(m) > K_ || std::abs(k) > K_)
    throw PreconditionError("block index out of range");
  return m_.block((m + K_) * r_, (k + K_) * r_, r_, r_);
}

void TruncOperator::set_block(int m, int k, const Mat& value) {
  if (std::abs(m) > K_ || std::abs(k) > K_)
    throw PreconditionError("block index out of range");
  if (value.rows() != r_ || value.cols() != r_)
    throw PreconditionError("block has the wrong rank");
  m_.block((m + K_) * r_, (k + K_) * r_, r_, r_) = value;
}

void TruncOperator::check_same_shape(const TruncOperator& other) const {
  if (K_ != other.K_ || r_ != other.r_)
    throw PreconditionError("operator shape mismatch");
}

TruncOperator TruncOperator::operator+(const TruncOperator& other) const {
  check_same_shape(other);
  return TruncOperator(K_, r_, m_ + other.m_, Provenance::Composite);
}

TruncOperator TruncOperator::operator-(const TruncOperator& other) const {
  check_same_shape(other);
  return TruncOperator(K_, r_, m_ - other.m_, Provenance::Composite);
}

TruncOperator TruncOperator::scaled(cplx factor) const {
  return TruncOperator(K_, r_, factor * m_, prov_);
}

TruncOperator multiply(const TruncOperator& a, const TruncOperator& b) {
  if (a.K() != b.K() || a.rank() != b.rank())
    throw PreconditionError("operator shape mismatch in multiply");
  return TruncOperator(a.K(), a.rank(), a.entries() * b.entries(),
                       Provenance::Composite);
}

TruncOperator adjoint(const TruncOperator& a) {
  return TruncOperator(a.K(), a.rank(), a.entries().adjoint().eval(),
                       a.provenance());
}

TruncOperator commutator(const TruncOperator& a, const TruncOperator& b) {
  if (a.K() != b.K() || a.rank() != b.rank())
    throw PreconditionError("operator shape mismatch in commutator");
  return TruncOperator(a.K(), a.rank(),
                       a.entries() * b.entries() - b.entries() * a.entries(),
                       Provenance::Composite);
}

double condition_estimate(const TruncOperator& a) {
  Eigen::BDCSVD<Mat> svd(a.entries());
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

TruncOperator inverse(const TruncOperator& a, double cond_limit) {
  Eigen::BDCSVD<Mat> svd(a.entries(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  const double cond = smin > 0.0 ? s(0) / smin
                                 : std::numeric_limits<double>::infinity();
  if (!(cond < cond_limit))
    throw SingularMatrixError("matrix inversion refused", cond);
  Mat inv = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();
  return TruncOperator(a.K(), a.rank(), std::move(inv), Provenance::Composite);
}

TruncOperator exp_path(const TruncOperator& v, double t) {
  Mat e = (t * v.entries()).exp();
  return TruncOperator(v.K(), v.rank(), std::move(e), Provenance::Composite);
}

TruncOperator epsilon(int K, int r) {
  TruncOperator e(K, r);
  for (int k = -K; k <= K; ++k) {
    const double s = (k >= 0) ? 1.0 : -1.0;
    e.set_block(k, k, s * Mat::Identity(r, r));
  }
  e.set_provenance(Provenance::Composite);
  return e;
}

TruncOperator quantize(const FormalSymbol& a, int K, std::string* warn) {
  if (warn && K < a.mode_bound())
    *warn = "quantization bound K below the symbol mode bound; "
            "coefficients beyond K are dropped";
  const int r = a.rank();
  TruncOperator out(K, r, Provenance::Quantized);
  for (int k = -K; k <= K; ++k) {
    // sigma_a(., k) as one Fourier table
    FourierFunction column = FourierFunction::zero(r, a.mode_bound());
    for (int j = 0; j < a.depth(); ++j) {
      const int d = a.order() - j;
      if (k > 0) {
        column = column + a.comp(j).plus.scaled(ipow(static_cast<double>(k), d));
      } else if (k < 0) {
        column = column + a.comp(j).minus.scaled(ipow(static_cast<double>(-k), d));
      } else if (d == 0) {
        column = column + a.comp(j).plus;
      }
    }
    for (int n = -a.mode_bound(); n <= a.mode_bound(); ++n) {
      const int m = k + n;
      if (std::abs(m) <= K) out.set_block(m, k, column.coeff(n));
    }
  }
  return out;
}

DecayProfile decay_profile(const TruncOperator& a, int p) {
  const int K = a.K();
  DecayProfile d;
  d.p = p;
  d.antidiag.assign(static_cast<std::size_t>(2 * K + 1), 0.0);
  const int W = K / 2;
  d.antidiag_window.assign(static_cast<std::size_t>(2 * W + 1), 0.0);
  for (int m = -K; m <= K; ++m) {
    for (int k = -K; k <= K; ++k) {
      const double bn = block_norm(a.block(m, k));
      if (bn == 0.0) continue;
      const int s = std::abs(m) + std::abs(k);
      const double w = ipow(1.0 + s, p);
      d.s_p = std::max(d.s_p, w * bn);
      auto& slot = d.antidiag[static_cast<std::size_t>(s)];
      slot = std::max(slot, bn);
      if (std::abs(m) <= W && std::abs(k) <= W) {
        auto& wslot = d.antidiag_window[static_cast<std::size_t>(s)];
        wslot = std::max(wslot, bn);
      }
    }
  }

  // log-log fit of the window maxima. Entries below a relative floor are
  // noise and excluded; data confined to the inner half of the window has
  // no measurable tail and certifies as infinitely decaying.
  const auto& t = d.antidiag_window;
  double tmax = 0.0;
  for (double v : t) tmax = std::max(tmax, v);
  if (tmax == 0.0) return d;  // zero matrix: +inf stands
  const double floor = std::max(1e-250, 1e-13 * tmax);
  int last_supported = 0;
  std::vector<std::pair<double, double>> pts;
  for (int s = 0; s < static_cast<int>(t.size()); ++s) {
    if (t[static_cast<std::size_t>(s)] > floor) {
      last_supported = s;
      if (s >= 1)
        pts.emplace_back(std::log1p(static_cast<double>(s)),
                         std::log(t[static_cast<std::size_t>(s)]));
    }
  }
  if (last_supported <= W) return d;  // no measurable tail: +inf stands
  if (static_cast<int>(pts.size()) < 2) {
    d.fitted_exponent = 0.0;  // tail present but unfittable: no evidence
    return d;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) return d;
  d.fitted_exponent = -(n * sxy - sx * sy) / denom;
  return d;
}

BundleElement make_bundle_element(const FormalSymbol& a,
                                  const std::optional<TruncOperator>& R, int K,
                                  const BundleConfig& cfg) {
  TruncOperator A = quantize(a, K);
  TruncOperator total = R ? (A + *R) : A;
  const double cond = condition_estimate(total);
  if (!(cond < cfg.cond_limit))
    throw SingularMatrixError("bundle element total is singular", cond);
  DecayProfile defect = decay_profile(total - A, cfg.defect_p);
  if (defect.s_p > cfg.defect_threshold)
    throw PreconditionError("bundle element defect exceeds the smoothing threshold");
  total.set_provenance(Provenance::Composite);
  return BundleElement{a, total, defect};
}

}  // namespace circpdo
