#pragma once

#include <vector>

#include "circpdo/fourier.hpp"

namespace circpdo {

// One homogeneous component, split by xi half line. Component j of a symbol
// of order o contributes plus(x) * xi^{o-j} for xi > 0 and
// minus(x) * |xi|^{o-j} for xi < 0.
struct HomogeneousPair {
  FourierFunction plus;
  FourierFunction minus;
};

// Formal classical symbol on the circle: an integer order and a finite list
// of homogeneous components of degrees order, order-1, ..., order-depth+1.
// Components beyond the stored depth are unknown, not zero; operations that
// would need them refuse the request.
class FormalSymbol {
public:
  FormalSymbol(int order, int rank, int mode_bound,
               std::vector<HomogeneousPair> components);

  // identity symbol: plus = minus = Id at j = 0, zero below
  static FormalSymbol unit(int rank, int mode_bound, int depth);
  // sigma(x, xi) = xi * Id (plus part xi, minus part -|xi|)
  static FormalSymbol xi(int rank, int mode_bound, int depth);
  // order-0 multiplication symbol by f(x), equal on both half lines
  static FormalSymbol multiplication(const FourierFunction& f, int depth);
  // depth-truncated expansion of (1 + xi^2)^{s/2} in homogeneous components;
  // the two half lines coincide because the function is even in xi
  static FormalSymbol sqrt_one_plus_xi2_power(int s, int rank, int mode_bound,
                                              int depth);

  int order() const { return order_; }
  int depth() const { return static_cast<int>(comps_.size()); }
  int rank() const { return rank_; }
  int mode_bound() const { return K_x_; }

  const HomogeneousPair& comp(int j) const;
  HomogeneousPair& comp(int j);

  FormalSymbol operator+(const FormalSymbol& other) const;
  FormalSymbol operator-(const FormalSymbol& other) const;
  FormalSymbol scaled(cplx factor) const;
  FormalSymbol truncated(int depth) const;

  // both principal half-line parts invertible at every point of the
  // quadrature grid of 4*K_x+1 points; on failure *bad_point (if given)
  // receives the offending grid point
  bool elliptic_at_order0(double* bad_point = nullptr) const;

  double max_abs() const;

private:
  int order_;
  int rank_;
  int K_x_;
  std::vector<HomogeneousPair> comps_;
};

// Star product truncated to `depth` components. Requires
// depth <= min(a.depth, b.depth): deeper components of the result would
// depend on data the inputs do not carry.
FormalSymbol compose(const FormalSymbol& a, const FormalSymbol& b, int depth);

// Formal adjoint symbol sum_alpha ((-i)^alpha / alpha!)
// d_xi^alpha d_x^alpha (conjugate transpose of sigma).
FormalSymbol adjoint_symbol(const FormalSymbol& a, int depth);

// Formal inverse: compose(a, parametrix(a, N), N) = 1 on retained degrees.
// Requires a elliptic at order 0.
FormalSymbol parametrix(const FormalSymbol& a, int depth);

// compose((1 + xi^2)^{-order/2}, a, depth); result has order 0.
FormalSymbol order_reduce(const FormalSymbol& a, int depth);

// Largest coefficient difference over shared components, for tests. Symbols
// must agree in order, rank and depth.
double max_coeff_diff(const FormalSymbol& a, const FormalSymbol& b);

// grid used by every ellipticity test: 4*K_x+1 equispaced points
std::vector<double> quadrature_grid(int mode_bound);

}  // namespace circpdo
