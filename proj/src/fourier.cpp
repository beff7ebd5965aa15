#include "circpdo/fourier.hpp"

#include <algorithm>
#include <cmath>

namespace circpdo {

FourierFunction::FourierFunction(int rank, int mode_bound)
    : r_(rank), K_x_(mode_bound) {
  if (rank < 1) throw PreconditionError("FourierFunction rank must be positive");
  if (mode_bound < 0) throw PreconditionError("FourierFunction mode bound must be non-negative");
  c_.assign(2 * K_x_ + 1, Mat::Zero(r_, r_));
}

FourierFunction FourierFunction::zero(int rank, int mode_bound) {
  return FourierFunction(rank, mode_bound);
}

FourierFunction FourierFunction::constant(const Mat& value, int mode_bound) {
  FourierFunction f(static_cast<int>(value.rows()), mode_bound);
  f.set_coeff(0, value);
  return f;
}

FourierFunction FourierFunction::harmonic(int mode, const Mat& value, int mode_bound) {
  FourierFunction f(static_cast<int>(value.rows()), mode_bound);
  f.set_coeff(mode, value);
  return f;
}

const Mat& FourierFunction::coeff(int n) const {
  if (std::abs(n) > K_x_) throw PreconditionError("Fourier mode out of range");
  return c_[static_cast<std::size_t>(n + K_x_)];
}

void FourierFunction::set_coeff(int n, const Mat& value) {
  if (std::abs(n) > K_x_) throw PreconditionError("Fourier mode out of range");
  if (value.rows() != r_ || value.cols() != r_)
    throw PreconditionError("coefficient block has wrong rank");
  c_[static_cast<std::size_t>(n + K_x_)] = value;
}

void FourierFunction::check_same_rank(const FourierFunction& other) const {
  if (r_ != other.r_) throw PreconditionError("FourierFunction rank mismatch");
}

FourierFunction FourierFunction::operator+(const FourierFunction& other) const {
  check_same_rank(other);
  const int K = std::max(K_x_, other.K_x_);
  FourierFunction out(r_, K);
  for (int n = -K; n <= K; ++n) {
    Mat v = Mat::Zero(r_, r_);
    if (std::abs(n) <= K_x_) v += coeff(n);
    if (std::abs(n) <= other.K_x_) v += other.coeff(n);
    out.set_coeff(n, v);
  }
  out.loss_ = std::max(loss_, other.loss_);
  return out;
}

FourierFunction FourierFunction::operator-(const FourierFunction& other) const {
  return *this + other.scaled(cplx(-1.0, 0.0));
}

FourierFunction FourierFunction::scaled(cplx factor) const {
  FourierFunction out(r_, K_x_);
  for (int n = -K_x_; n <= K_x_; ++n) out.set_coeff(n, factor * coeff(n));
  out.loss_ = loss_ * std::abs(factor);
  return out;
}

FourierFunction FourierFunction::product(const FourierFunction& other) const {
  check_same_rank(other);
  const int K = std::max(K_x_, other.K_x_);
  FourierFunction out(r_, K);
  double dropped = 0.0;
  for (int n1 = -K_x_; n1 <= K_x_; ++n1) {
    const Mat& a = c_[static_cast<std::size_t>(n1 + K_x_)];
    if (a.isZero(0.0)) continue;
    for (int n2 = -other.K_x_; n2 <= other.K_x_; ++n2) {
      const Mat& b = other.c_[static_cast<std::size_t>(n2 + other.K_x_)];
      if (b.isZero(0.0)) continue;
      const int n = n1 + n2;
      const Mat term = a * b;
      if (std::abs(n) <= K) {
        out.c_[static_cast<std::size_t>(n + K)] += term;
      } else {
        dropped = std::max(dropped, term.cwiseAbs().maxCoeff());
      }
    }
  }
  out.loss_ = std::max({loss_, other.loss_, dropped});
  return out;
}

FourierFunction FourierFunction::dx(int alpha) const {
  if (alpha < 0) throw PreconditionError("derivative order must be non-negative");
  FourierFunction out(r_, K_x_);
  for (int n = -K_x_; n <= K_x_; ++n) {
    const cplx in(0.0, static_cast<double>(n));
    cplx w(1.0, 0.0);
    for (int l = 0; l < alpha; ++l) w *= in;
    out.set_coeff(n, w * coeff(n));
  }
  out.loss_ = loss_;
  return out;
}

FourierFunction FourierFunction::conj_transpose() const {
  FourierFunction out(r_, K_x_);
  for (int n = -K_x_; n <= K_x_; ++n) out.set_coeff(n, coeff(-n).adjoint());
  out.loss_ = loss_;
  return out;
}

Mat FourierFunction::eval(double x) const {
  Mat v = Mat::Zero(r_, r_);
  for (int n = -K_x_; n <= K_x_; ++n) {
    v += std::exp(cplx(0.0, n * x)) * coeff(n);
  }
  return v;
}

double FourierFunction::max_abs() const {
  double m = 0.0;
  for (const Mat& b : c_) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace circpdo
