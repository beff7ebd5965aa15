#include "circpdo/symbol.hpp"

#include <algorithm>
#include <cmath>

namespace circpdo {

namespace {

// (-i)^alpha and (+i)^alpha, exact
cplx unit_power(int alpha, bool plus_i) {
  switch (((alpha % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return plus_i ? cplx{0.0, 1.0} : cplx{0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return plus_i ? cplx{0.0, -1.0} : cplx{0.0, 1.0};
  }
}

double factorial(int n) {
  double v = 1.0;
  for (int l = 2; l <= n; ++l) v *= l;
  return v;
}

// d (d-1) ... (d-alpha+1); this is d_xi^alpha applied to xi^d, divided by
// the degree shift
double falling(double d, int alpha) {
  double v = 1.0;
  for (int l = 0; l < alpha; ++l) v *= (d - l);
  return v;
}

// side weight of the alpha-th expansion term acting on a component of
// degree d: ((-i)^alpha/alpha!) ff(d,alpha) on xi>0. On xi<0 each d_xi
// contributes an extra -1 (|xi| = -xi there), so the weight flips to
// ((+i)^alpha/alpha!) ff(d,alpha).
cplx side_weight(int alpha, double degree, bool minus_side) {
  return unit_power(alpha, minus_side) * falling(degree, alpha) / factorial(alpha);
}

Mat invert_block(const Mat& v, double* sigma_min_out) {
  Eigen::JacobiSVD<Mat> svd(v, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (sigma_min_out) *sigma_min_out = smin;
  if (smin <= 1e-12 * std::max(1.0, smax)) return Mat();
  return svd.matrixV() *
         svd.singularValues().cwiseInverse().asDiagonal() *
         svd.matrixU().adjoint();
}

}  // namespace

std::vector<double> quadrature_grid(int mode_bound) {
  const int M = 4 * mode_bound + 1;
  std::vector<double> xs(static_cast<std::size_t>(M));
  for (int t = 0; t < M; ++t) xs[static_cast<std::size_t>(t)] = 2.0 * M_PI * t / M;
  return xs;
}

FormalSymbol::FormalSymbol(int order, int rank, int mode_bound,
                           std::vector<HomogeneousPair> components)
    : order_(order), rank_(rank), K_x_(mode_bound), comps_(std::move(components)) {
  if (comps_.empty()) throw PreconditionError("symbol depth must be at least 1");
  for (const auto& c : comps_) {
    if (c.plus.rank() != rank_ || c.minus.rank() != rank_)
      throw PreconditionError("symbol components must share the rank");
    if (c.plus.mode_bound() != K_x_ || c.minus.mode_bound() != K_x_)
      throw PreconditionError("symbol components must share the mode bound");
  }
}

FormalSymbol FormalSymbol::unit(int rank, int mode_bound, int depth) {
  std::vector<HomogeneousPair> comps;
  const Mat id = Mat::Identity(rank, rank);
  comps.push_back({FourierFunction::constant(id, mode_bound),
                   FourierFunction::constant(id, mode_bound)});
  for (int j = 1; j < depth; ++j)
    comps.push_back({FourierFunction::zero(rank, mode_bound),
                     FourierFunction::zero(rank, mode_bound)});
  return FormalSymbol(0, rank, mode_bound, std::move(comps));
}

FormalSymbol FormalSymbol::xi(int rank, int mode_bound, int depth) {
  std::vector<HomogeneousPair> comps;
  const Mat id = Mat::Identity(rank, rank);
  comps.push_back({FourierFunction::constant(id, mode_bound),
                   FourierFunction::constant(-id, mode_bound)});
  for (int j = 1; j < depth; ++j)
    comps.push_back({FourierFunction::zero(rank, mode_bound),
                     FourierFunction::zero(rank, mode_bound)});
  return FormalSymbol(1, rank, mode_bound, std::move(comps));
}

FormalSymbol FormalSymbol::multiplication(const FourierFunction& f, int depth) {
  std::vector<HomogeneousPair> comps;
  comps.push_back({f, f});
  for (int j = 1; j < depth; ++j)
    comps.push_back({FourierFunction::zero(f.rank(), f.mode_bound()),
                     FourierFunction::zero(f.rank(), f.mode_bound())});
  return FormalSymbol(0, f.rank(), f.mode_bound(), std::move(comps));
}

FormalSymbol FormalSymbol::sqrt_one_plus_xi2_power(int s, int rank,
                                                   int mode_bound, int depth) {
  // (1 + xi^2)^{s/2} = |xi|^s sum_m binom(s/2, m) |xi|^{-2m}
  std::vector<HomogeneousPair> comps;
  const Mat id = Mat::Identity(rank, rank);
  for (int j = 0; j < depth; ++j) {
    if (j % 2 != 0) {
      comps.push_back({FourierFunction::zero(rank, mode_bound),
                       FourierFunction::zero(rank, mode_bound)});
      continue;
    }
    const int m = j / 2;
    double binom = 1.0;
    for (int l = 0; l < m; ++l) binom *= (0.5 * s - l) / (l + 1);
    comps.push_back({FourierFunction::constant(binom * id, mode_bound),
                     FourierFunction::constant(binom * id, mode_bound)});
  }
  return FormalSymbol(s, rank, mode_bound, std::move(comps));
}

const HomogeneousPair& FormalSymbol::comp(int j) const {
  if (j < 0 || j >= depth()) throw PreconditionError("component index out of range");
  return comps_[static_cast<std::size_t>(j)];
}

HomogeneousPair& FormalSymbol::comp(int j) {
  if (j < 0 || j >= depth()) throw PreconditionError("component index out of range");
  return comps_[static_cast<std::size_t>(j)];
}

FormalSymbol FormalSymbol::operator+(const FormalSymbol& other) const {
  if (order_ != other.order_) throw PreconditionError("symbol order mismatch in sum");
  if (rank_ != other.rank_) throw PreconditionError("symbol rank mismatch in sum");
  if (depth() != other.depth()) throw PreconditionError("symbol depth mismatch in sum");
  std::vector<HomogeneousPair> comps;
  for (int j = 0; j < depth(); ++j)
    comps.push_back({comp(j).plus + other.comp(j).plus,
                     comp(j).minus + other.comp(j).minus});
  return FormalSymbol(order_, rank_, std::max(K_x_, other.K_x_), std::move(comps));
}

FormalSymbol FormalSymbol::operator-(const FormalSymbol& other) const {
  return *this + other.scaled(cplx(-1.0, 0.0));
}

FormalSymbol FormalSymbol::scaled(cplx factor) const {
  std::vector<HomogeneousPair> comps;
  for (int j = 0; j < depth(); ++j)
    comps.push_back({comp(j).plus.scaled(factor), comp(j).minus.scaled(factor)});
  return FormalSymbol(order_, rank_, K_x_, std::move(comps));
}

FormalSymbol FormalSymbol::truncated(int depth_out) const {
  if (depth_out < 1 || depth_out > depth())
    throw PreconditionError("truncation depth exceeds representable components");
  std::vector<HomogeneousPair> comps(comps_.begin(), comps_.begin() + depth_out);
  return FormalSymbol(order_, rank_, K_x_, std::move(comps));
}

bool FormalSymbol::elliptic_at_order0(double* bad_point) const {
  for (double x : quadrature_grid(K_x_)) {
    for (const FourierFunction* part : {&comp(0).plus, &comp(0).minus}) {
      const Mat v = part->eval(x);
      double smin = 0.0;
      const Mat inv = invert_block(v, &smin);
      if (inv.size() == 0) {
        if (bad_point) *bad_point = x;
        return false;
      }
    }
  }
  return true;
}

double FormalSymbol::max_abs() const {
  double m = 0.0;
  for (const auto& c : comps_)
    m = std::max({m, c.plus.max_abs(), c.minus.max_abs()});
  return m;
}

FormalSymbol compose(const FormalSymbol& a, const FormalSymbol& b, int depth) {
  if (a.rank() != b.rank()) throw PreconditionError("rank mismatch in compose");
  if (depth < 1) throw PreconditionError("compose depth must be positive");
  if (depth > std::min(a.depth(), b.depth()))
    throw PreconditionError("compose depth exceeds representable components");
  const int K = std::max(a.mode_bound(), b.mode_bound());
  const int r = a.rank();
  std::vector<HomogeneousPair> comps;
  for (int j = 0; j < depth; ++j) {
    FourierFunction plus = FourierFunction::zero(r, K);
    FourierFunction minus = FourierFunction::zero(r, K);
    for (int alpha = 0; alpha <= j; ++alpha) {
      for (int j1 = 0; j1 + alpha <= j; ++j1) {
        const int j2 = j - alpha - j1;
        const double d = static_cast<double>(a.order() - j1);
        const cplx wp = side_weight(alpha, d, false);
        const cplx wm = side_weight(alpha, d, true);
        if (wp != cplx(0.0, 0.0))
          plus = plus + a.comp(j1).plus.product(b.comp(j2).plus.dx(alpha)).scaled(wp);
        if (wm != cplx(0.0, 0.0))
          minus = minus + a.comp(j1).minus.product(b.comp(j2).minus.dx(alpha)).scaled(wm);
      }
    }
    comps.push_back({plus, minus});
  }
  return FormalSymbol(a.order() + b.order(), r, K, std::move(comps));
}

FormalSymbol adjoint_symbol(const FormalSymbol& a, int depth) {
  if (depth < 1) throw PreconditionError("adjoint depth must be positive");
  if (depth > a.depth())
    throw PreconditionError("adjoint depth exceeds representable components");
  const int K = a.mode_bound();
  const int r = a.rank();
  std::vector<HomogeneousPair> comps;
  for (int j = 0; j < depth; ++j) {
    FourierFunction plus = FourierFunction::zero(r, K);
    FourierFunction minus = FourierFunction::zero(r, K);
    for (int alpha = 0; alpha <= j; ++alpha) {
      const int jp = j - alpha;
      const double d = static_cast<double>(a.order() - jp);
      const cplx wp = side_weight(alpha, d, false);
      const cplx wm = side_weight(alpha, d, true);
      if (wp != cplx(0.0, 0.0))
        plus = plus + a.comp(jp).plus.conj_transpose().dx(alpha).scaled(wp);
      if (wm != cplx(0.0, 0.0))
        minus = minus + a.comp(jp).minus.conj_transpose().dx(alpha).scaled(wm);
    }
    comps.push_back({plus, minus});
  }
  return FormalSymbol(a.order(), r, K, std::move(comps));
}

namespace {

// pointwise inverse of the principal part on the quadrature grid, projected
// back to modes |n| <= K_x; quality is recorded, not assumed
FourierFunction invert_principal(const FourierFunction& f) {
  const int K = f.mode_bound();
  const int r = f.rank();
  const auto grid = quadrature_grid(K);
  const int M = static_cast<int>(grid.size());
  std::vector<Mat> values;
  values.reserve(grid.size());
  for (double x : grid) {
    double smin = 0.0;
    Mat inv = invert_block(f.eval(x), &smin);
    if (inv.size() == 0)
      throw EllipticityError("principal part singular on the quadrature grid", x);
    values.push_back(std::move(inv));
  }
  FourierFunction out(r, K);
  for (int n = -K; n <= K; ++n) {
    Mat c = Mat::Zero(r, r);
    for (int t = 0; t < M; ++t)
      c += std::exp(cplx(0.0, -n * grid[static_cast<std::size_t>(t)])) *
           values[static_cast<std::size_t>(t)];
    out.set_coeff(n, c / static_cast<double>(M));
  }
  // honest truncation loss: defect of the exact convolution against 1
  FourierFunction defect = f.product(out) -
      FourierFunction::constant(Mat::Identity(r, r), K);
  out.set_loss(defect.max_abs());
  return out;
}

}  // namespace

FormalSymbol parametrix(const FormalSymbol& a, int depth) {
  if (depth < 1) throw PreconditionError("parametrix depth must be positive");
  if (depth > a.depth())
    throw PreconditionError("parametrix depth exceeds representable components");
  double bad = 0.0;
  if (!a.elliptic_at_order0(&bad))
    throw EllipticityError("parametrix requires an elliptic principal part", bad);

  const int K = a.mode_bound();
  const int r = a.rank();
  std::vector<FourierFunction> bp, bm;  // parametrix components per half line
  bp.push_back(invert_principal(a.comp(0).plus));
  bm.push_back(invert_principal(a.comp(0).minus));

  // degree-(-j) equation of compose(a, b): a_0 b_j = - sum of lower terms
  for (int j = 1; j < depth; ++j) {
    FourierFunction sp = FourierFunction::zero(r, K);
    FourierFunction sm = FourierFunction::zero(r, K);
    for (int alpha = 0; alpha <= j; ++alpha) {
      for (int j1 = 0; j1 + alpha <= j; ++j1) {
        const int j2 = j - alpha - j1;
        if (j2 == j) continue;  // the unknown itself
        const double d = static_cast<double>(a.order() - j1);
        const cplx wp = side_weight(alpha, d, false);
        const cplx wm = side_weight(alpha, d, true);
        if (wp != cplx(0.0, 0.0))
          sp = sp + a.comp(j1).plus.product(bp[static_cast<std::size_t>(j2)].dx(alpha)).scaled(wp);
        if (wm != cplx(0.0, 0.0))
          sm = sm + a.comp(j1).minus.product(bm[static_cast<std::size_t>(j2)].dx(alpha)).scaled(wm);
      }
    }
    bp.push_back(bp[0].product(sp).scaled(cplx(-1.0, 0.0)));
    bm.push_back(bm[0].product(sm).scaled(cplx(-1.0, 0.0)));
  }

  std::vector<HomogeneousPair> comps;
  for (int j = 0; j < depth; ++j)
    comps.push_back({bp[static_cast<std::size_t>(j)], bm[static_cast<std::size_t>(j)]});
  return FormalSymbol(-a.order(), r, K, std::move(comps));
}

FormalSymbol order_reduce(const FormalSymbol& a, int depth) {
  const FormalSymbol lambda = FormalSymbol::sqrt_one_plus_xi2_power(
      -a.order(), a.rank(), a.mode_bound(), depth);
  return compose(lambda, a, depth);
}

double max_coeff_diff(const FormalSymbol& a, const FormalSymbol& b) {
  if (a.order() != b.order() || a.rank() != b.rank() || a.depth() != b.depth())
    throw PreconditionError("symbol shape mismatch in comparison");
  double m = 0.0;
  for (int j = 0; j < a.depth(); ++j) {
    m = std::max(m, (a.comp(j).plus - b.comp(j).plus).max_abs());
    m = std::max(m, (a.comp(j).minus - b.comp(j).minus).max_abs());
  }
  return m;
}

}  // namespace circpdo
