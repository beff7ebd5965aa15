#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "circpdo/errors.hpp"

namespace circpdo {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

// Smooth function on the circle held as a finite Fourier table with r x r
// matrix coefficients on modes |n| <= K_x. K_x is a working resolution, not
// the data support: sums keep the larger bound, products drop modes beyond
// it and record the largest dropped magnitude in loss().
class FourierFunction {
public:
  FourierFunction(int rank, int mode_bound);

  static FourierFunction zero(int rank, int mode_bound);
  static FourierFunction constant(const Mat& value, int mode_bound);
  // value * e^{i * mode * x}
  static FourierFunction harmonic(int mode, const Mat& value, int mode_bound);

  int rank() const { return r_; }
  int mode_bound() const { return K_x_; }
  double loss() const { return loss_; }
  void set_loss(double v) { loss_ = v; }

  const Mat& coeff(int n) const;
  void set_coeff(int n, const Mat& value);

  FourierFunction operator+(const FourierFunction& other) const;
  FourierFunction operator-(const FourierFunction& other) const;
  FourierFunction scaled(cplx factor) const;
  // pointwise product: truncating convolution
  FourierFunction product(const FourierFunction& other) const;
  // (d/dx)^alpha: mode n picks up (i n)^alpha
  FourierFunction dx(int alpha) const;
  // pointwise conjugate transpose: coefficient m -> coeff(-m)^H
  FourierFunction conj_transpose() const;

  Mat eval(double x) const;

  // largest coefficient entry magnitude
  double max_abs() const;
  bool is_zero(double tol = 0.0) const { return max_abs() <= tol; }

private:
  int r_;
  int K_x_;
  double loss_ = 0.0;
  std::vector<Mat> c_;  // index n + K_x_

  void check_same_rank(const FourierFunction& other) const;
};

}  // namespace circpdo
