#include "circpdo/cocycle.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>

#include "circpdo/errors.hpp"

namespace circpdo {

namespace {

constexpr double kStabRelDefault = 1e-8;

// tr(A * Z) without forming the product
cplx pair_trace(const Mat& A, const Mat& Z) {
  return A.transpose().cwiseProduct(Z).sum();
}

Mat one_plus_eps(int K, int r) {
  return TruncOperator::identity(K, r).entries() + epsilon(K, r).entries();
}

void require_same_shape(const TruncOperator& a, const TruncOperator& b) {
  if (a.K() != b.K() || a.rank() != b.rank())
    throw PreconditionError("operands differ in truncation shape");
}

cplx schwinger_at(const TruncOperator& a, const TruncOperator& b, int W) {
  const Mat e = epsilon(a.K(), a.rank()).entries();
  const Mat ea = e * a.entries() - a.entries() * e;
  const Mat eb = e * b.entries() - b.entries() * e;
  return 0.25 * windowed_trace(
                    TruncOperator(a.K(), a.rank(), e * (ea * eb)), W);
}

cplx curvature_trace_at(const TruncOperator& a, const TruncOperator& b,
                        int W) {
  const TruncOperator om = curvature_closed_form(a, b);
  const Mat w = om.entries() * one_plus_eps(a.K(), a.rank());
  return windowed_trace(TruncOperator(a.K(), a.rank(), w), W);
}

cplx proxy_stabilized(cplx (*fn)(const TruncOperator&, const TruncOperator&,
                                 int),
                      const TruncOperator& a, const TruncOperator& b,
                      bool* stabilized) {
  const int W = std::max(1, a.K() / 2);
  const cplx val = fn(a, b, W);
  if (stabilized) {
    const int W2 = std::max(1, W / 2);
    const cplx val2 = (W2 == W) ? val : fn(a, b, W2);
    *stabilized = std::abs(val - val2) <= kStabRelDefault * (1.0 + std::abs(val));
  }
  return val;
}

}  // namespace

TruncOperator mode_window_projector(int K, int r, int window) {
  TruncOperator p = TruncOperator::zero(K, r);
  const Mat id = Mat::Identity(r, r);
  for (int m = -K; m <= K; ++m)
    if (std::abs(m) <= window) p.set_block(m, m, id);
  return p;
}

cplx windowed_trace(const TruncOperator& M, int window) {
  const int K = M.K(), r = M.rank();
  cplx tr = 0.0;
  for (int m = -K; m <= K; ++m) {
    if (std::abs(m) > window) continue;
    const int off = (m + K) * r;
    for (int i = 0; i < r; ++i) tr += M.entries()(off + i, off + i);
  }
  return tr;
}

TruncOperator masked_commutator(const TruncOperator& a, const TruncOperator& b,
                                int window) {
  require_same_shape(a, b);
  TruncOperator c = commutator(a, b);
  const int K = a.K(), r = a.rank();
  for (int m = -K; m <= K; ++m) {
    if (std::abs(m) <= window) continue;
    c.entries().middleRows((m + K) * r, r).setZero();
    c.entries().middleCols((m + K) * r, r).setZero();
  }
  return c;
}

cplx schwinger(const TruncOperator& a, const TruncOperator& b,
               bool* stabilized) {
  require_same_shape(a, b);
  return proxy_stabilized(&schwinger_at, a, b, stabilized);
}

cplx curvature_trace(const TruncOperator& a, const TruncOperator& b,
                     bool* stabilized) {
  require_same_shape(a, b);
  return proxy_stabilized(&curvature_trace_at, a, b, stabilized);
}

cplx four_cocycle_trace(const TruncOperator& a, const TruncOperator& b,
                        const TruncOperator& c, const TruncOperator& d,
                        bool* stabilized) {
  require_same_shape(a, b);
  require_same_shape(a, c);
  require_same_shape(a, d);
  const auto eval = [&](int W) {
    const TruncOperator w =
        wedge_square(&curvature_closed_form, a, b, c, d);
    const Mat m = w.entries() * one_plus_eps(a.K(), a.rank());
    return windowed_trace(TruncOperator(a.K(), a.rank(), m), W);
  };
  const int W = std::max(1, a.K() / 2);
  const cplx val = eval(W);
  if (stabilized) {
    const int W2 = std::max(1, W / 2);
    const cplx val2 = (W2 == W) ? val : eval(W2);
    *stabilized = std::abs(val - val2) <= kStabRelDefault * (1.0 + std::abs(val));
  }
  return val;
}

BasisSpec default_basis_spec(int r, const CocycleConfig& cfg) {
  if (cfg.N_b < 0) throw PreconditionError("negative basis bound");
  const int K_x = std::max(cfg.N_b, 2);
  const int depth = std::max(cfg.zeta_depth, 1);
  BasisSpec spec;
  const Mat id = Mat::Identity(r, r);
  for (int n = -cfg.N_b; n <= cfg.N_b; ++n) {
    spec.names.push_back("u(" + std::to_string(n) + ")");
    spec.symbols.push_back(FormalSymbol::multiplication(
        FourierFunction::harmonic(n, id, K_x), depth));
  }
  if (cfg.include_zeta) {
    spec.names.push_back("zeta");
    spec.symbols.push_back(
        order_reduce(FormalSymbol::xi(r, K_x, depth), depth));
  }
  return spec;
}

std::vector<TruncOperator> quantize_basis(const BasisSpec& spec, int K) {
  std::vector<TruncOperator> ops;
  ops.reserve(spec.symbols.size());
  for (const auto& s : spec.symbols) ops.push_back(quantize(s, K));
  return ops;
}

namespace {

using WindowedPair = cplx (*)(const TruncOperator&, const TruncOperator&, int);

Mat fill_pairs(const std::vector<TruncOperator>& ops, int W, WindowedPair fn) {
  const int B = static_cast<int>(ops.size());
  Mat vals(B, B);
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < B; ++j)
      vals(i, j) = (i == j) ? cplx(0.0) : fn(ops[i], ops[j], W);
  return vals;
}

CochainTable build_table(const BasisSpec& spec, int K,
                         const CocycleConfig& cfg, const std::string& tag,
                         WindowedPair fn) {
  if (K < 2) throw PreconditionError("truncation too small for a table");
  CochainTable t;
  t.names = spec.names;
  t.basis = quantize_basis(spec, K);
  t.K = K;
  t.window = std::max(1, K / 2);
  t.normalization = tag;
  t.values = fill_pairs(t.basis, t.window, fn);

  const double scale = std::max(1.0, t.values.cwiseAbs().maxCoeff());
  const double skew = (t.values + t.values.transpose()).cwiseAbs().maxCoeff();
  if (skew > 1e-12 * scale)
    throw Error("cochain table lost antisymmetry: " + std::to_string(skew));

  const std::vector<TruncOperator> ops2 = quantize_basis(spec, 2 * K);
  const Mat vals2 = fill_pairs(ops2, K, fn);
  t.stabilized = ((vals2 - t.values).cwiseAbs().array() <=
                  cfg.stab_rel * (1.0 + vals2.cwiseAbs().array()))
                     .all();

  const int W = t.window;
  t.generator = [fn, W](const TruncOperator& a, const TruncOperator& b) {
    return fn(a, b, W);
  };
  return t;
}

}  // namespace

CochainTable schwinger_table(const BasisSpec& spec, int K,
                             const CocycleConfig& cfg) {
  return build_table(spec, K, cfg, "schwinger:(1/4)tr(eps[eps,a][eps,b])",
                     &schwinger_at);
}

CochainTable curvature_trace_table(const BasisSpec& spec, int K,
                                   const CocycleConfig& cfg) {
  return build_table(spec, K, cfg, "curvature:tr(Omega(a,b)(1+eps))",
                     &curvature_trace_at);
}

CochainTable scaled_table(const CochainTable& c, double nu) {
  CochainTable t = c;
  t.values *= nu;
  t.normalization = c.normalization + "*" + std::to_string(nu);
  if (c.generator) {
    auto base = c.generator;
    t.generator = [base, nu](const TruncOperator& a, const TruncOperator& b) {
      return nu * base(a, b);
    };
  }
  return t;
}

cplx apply_functional(const Mat& lambda_matrix, const TruncOperator& Y) {
  return (lambda_matrix * Y.entries()).trace();
}

CochainTable add_coboundary(const CochainTable& c, const Mat& mu) {
  CochainTable t = c;
  t.generator = nullptr;  // values no longer come from a single formula
  t.normalization = c.normalization + "+coboundary";
  const int B = c.size();
  for (int i = 0; i < B; ++i)
    for (int j = i + 1; j < B; ++j) {
      const cplx d = (mu * masked_commutator(c.basis[i], c.basis[j], c.window)
                               .entries())
                         .trace();
      t.values(i, j) += d;
      t.values(j, i) -= d;
    }
  return t;
}

namespace {

struct BracketData {
  std::vector<std::pair<int, int>> pairs;   // i < j
  std::vector<TruncOperator> brackets;      // masked [x_i, x_j]
  Mat coeffs;                               // B x P basis expansion
  double expansion_residual = 0.0;
};

BracketData bracket_data(const CochainTable& c) {
  const int B = c.size();
  const int D = static_cast<int>(c.basis.front().entries().rows());
  BracketData out;
  for (int i = 0; i < B; ++i)
    for (int j = i + 1; j < B; ++j) {
      out.pairs.emplace_back(i, j);
      out.brackets.push_back(masked_commutator(c.basis[i], c.basis[j],
                                               c.window));
    }
  const int P = static_cast<int>(out.pairs.size());

  Mat E(D * D, B);
  for (int k = 0; k < B; ++k)
    E.col(k) = c.basis[k].entries().reshaped();
  Mat rhs(D * D, P);
  for (int q = 0; q < P; ++q)
    rhs.col(q) = out.brackets[q].entries().reshaped();

  Eigen::BDCSVD<Mat> svd(E, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.coeffs = svd.solve(rhs);
  for (int q = 0; q < P; ++q) {
    const double nrm = rhs.col(q).norm();
    if (nrm == 0.0) continue;
    const double res = (E * out.coeffs.col(q) - rhs.col(q)).norm() / nrm;
    out.expansion_residual = std::max(out.expansion_residual, res);
  }
  return out;
}

}  // namespace

CocycleCheck cocycle_residual(const CochainTable& c) {
  const int B = c.size();
  if (B < 3) throw PreconditionError("need at least three basis elements");
  const BracketData bd = bracket_data(c);
  const auto pair_index = [&](int i, int j) {
    // i < j in the row-major upper triangle ordering used above
    return i * B - i * (i + 1) / 2 + (j - i - 1);
  };

  CocycleCheck out;
  out.expansion_residual = bd.expansion_residual;
  if (!c.generator && out.expansion_residual > 1e-8)
    throw ToleranceError("basis cannot express its own brackets",
                         out.expansion_residual);

  const auto eval = [&](int qi, int qj, int z) -> cplx {
    const int q = pair_index(qi, qj);
    if (c.generator) return c.generator(bd.brackets[q], c.basis[z]);
    cplx v = 0.0;
    for (int m = 0; m < B; ++m) v += bd.coeffs(m, q) * c.values(m, z);
    return v;
  };

  for (int i = 0; i < B; ++i)
    for (int j = i + 1; j < B; ++j)
      for (int k = j + 1; k < B; ++k) {
        const cplx d = eval(i, j, k) - eval(i, k, j) + eval(j, k, i);
        out.residual = std::max(out.residual, std::abs(d));
      }
  return out;
}

CoboundarySolve coboundary_solve(const CochainTable& c1,
                                 const CochainTable& c2) {
  if (c1.names != c2.names || c1.K != c2.K || c1.window != c2.window)
    throw PreconditionError("tables disagree in basis or truncation");
  const int B = c1.size();
  const int D = static_cast<int>(c1.basis.front().entries().rows());
  const BracketData bd = bracket_data(c1);
  const int P = static_cast<int>(bd.pairs.size());

  Mat A(P, D * D);
  Eigen::VectorXcd d(P), v1(P), v2(P);
  for (int q = 0; q < P; ++q) {
    A.row(q) = bd.brackets[q].entries().reshaped().transpose();
    const auto [i, j] = bd.pairs[q];
    v1(q) = c1.values(i, j);
    v2(q) = c2.values(i, j);
    d(q) = v1(q) - v2(q);
  }

  Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXcd s = svd.solve(d);
  const Eigen::VectorXcd misfit = A * s - d;

  CoboundarySolve out;
  // normalized by the table scale, not ||d||: when the tables nearly agree,
  // d is numerical dust and the fit would otherwise look spuriously bad
  const double scale = std::max({v1.norm(), v2.norm(), d.norm(), 1e-300});
  out.residual = misfit.norm() / scale;
  out.misfit_max = misfit.size() ? misfit.cwiseAbs().maxCoeff() : 0.0;
  out.expansion_residual = bd.expansion_residual;
  out.lambda_matrix = s.reshaped(D, D).transpose();
  out.on_basis.reserve(B);
  for (int k = 0; k < B; ++k)
    out.on_basis.push_back(apply_functional(out.lambda_matrix, c1.basis[k]));
  return out;
}

Certificate nontriviality_certificate(const CochainTable& c) {
  CochainTable zero = c;
  zero.values.setZero();
  zero.generator = nullptr;

  Certificate cert;
  cert.fit = coboundary_solve(c, zero);
  cert.best_misfit = cert.fit.misfit_max;
  cert.c_scale = c.values.size() ? c.values.cwiseAbs().maxCoeff() : 0.0;
  cert.degenerate = cert.c_scale <= 1e-300;
  cert.pass = !cert.degenerate && cert.best_misfit >= 0.1 * cert.c_scale;
  return cert;
}

namespace {

// sign of the permutation sorting 4 distinct small ints; 0 on repeats
int sort_sign4(std::array<int, 4>& v) {
  int sign = 1;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      if (v[a] == v[b]) return 0;
      if (v[a] > v[b]) {
        std::swap(v[a], v[b]);
        sign = -sign;
      }
    }
  return sign;
}

std::vector<cplx> fill_four(const std::vector<TruncOperator>& ops, int W) {
  const int B = static_cast<int>(ops.size());
  const int K = ops.front().K(), r = ops.front().rank();
  const Mat pe = one_plus_eps(K, r);
  const Mat pw = mode_window_projector(K, r, W).entries();

  // omega[q] for sorted pairs q=(i,j), plus the trailing factor used by the
  // windowed pair trace
  std::vector<Mat> om, tail;
  std::vector<std::vector<int>> qidx(B, std::vector<int>(B, -1));
  for (int i = 0; i < B; ++i)
    for (int j = i + 1; j < B; ++j) {
      qidx[i][j] = static_cast<int>(om.size());
      om.push_back(curvature_closed_form(ops[i], ops[j]).entries());
      tail.push_back(om.back() * (pe * pw));
    }
  const auto term = [&](int a, int b, int c, int d) {
    return pair_trace(om[qidx[a][b]], tail[qidx[c][d]]);
  };

  std::vector<cplx> vals(static_cast<std::size_t>(B) * B * B * B, cplx(0.0));
  const auto flat = [B](int i, int j, int k, int l) {
    return ((static_cast<std::size_t>(i) * B + j) * B + k) * B + l;
  };
  for (int i = 0; i < B; ++i)
    for (int j = i + 1; j < B; ++j)
      for (int k = j + 1; k < B; ++k)
        for (int l = k + 1; l < B; ++l) {
          const cplx t = term(i, j, k, l) + term(k, l, i, j) -
                         term(i, k, j, l) - term(j, l, i, k) +
                         term(i, l, j, k) + term(j, k, i, l);
          // expand to all 24 argument orders with the permutation sign
          static constexpr int perm4[24][4] = {
              {0, 1, 2, 3}, {0, 1, 3, 2}, {0, 2, 1, 3}, {0, 2, 3, 1},
              {0, 3, 1, 2}, {0, 3, 2, 1}, {1, 0, 2, 3}, {1, 0, 3, 2},
              {1, 2, 0, 3}, {1, 2, 3, 0}, {1, 3, 0, 2}, {1, 3, 2, 0},
              {2, 0, 1, 3}, {2, 0, 3, 1}, {2, 1, 0, 3}, {2, 1, 3, 0},
              {2, 3, 0, 1}, {2, 3, 1, 0}, {3, 0, 1, 2}, {3, 0, 2, 1},
              {3, 1, 0, 2}, {3, 1, 2, 0}, {3, 2, 0, 1}, {3, 2, 1, 0}};
          const int base[4] = {i, j, k, l};
          for (const auto& p : perm4) {
            std::array<int, 4> arg = {base[p[0]], base[p[1]], base[p[2]],
                                      base[p[3]]};
            std::array<int, 4> sorted = arg;
            const int sgn = sort_sign4(sorted);
            vals[flat(arg[0], arg[1], arg[2], arg[3])] =
                static_cast<double>(sgn) * t;
          }
        }
  return vals;
}

}  // namespace

cplx FourTable::value(int i, int j, int k, int l) const {
  const int B = size();
  return values[((static_cast<std::size_t>(i) * B + j) * B + k) * B + l];
}

FourTable four_cocycle_table(const BasisSpec& spec, int K,
                             const CocycleConfig& cfg) {
  if (K < 2) throw PreconditionError("truncation too small for a table");
  FourTable t;
  t.names = spec.names;
  t.basis = quantize_basis(spec, K);
  t.K = K;
  t.window = std::max(1, K / 2);
  t.values = fill_four(t.basis, t.window);

  const std::vector<TruncOperator> ops2 = quantize_basis(spec, 2 * K);
  const std::vector<cplx> vals2 = fill_four(ops2, K);
  t.stabilized = true;
  for (std::size_t q = 0; q < vals2.size(); ++q)
    if (std::abs(vals2[q] - t.values[q]) >
        cfg.stab_rel * (1.0 + std::abs(vals2[q])))
      t.stabilized = false;
  return t;
}

Certificate4 nontriviality_certificate4(const FourTable& c) {
  Certificate4 cert;
  for (const cplx& v : c.values)
    cert.c_scale = std::max(cert.c_scale, std::abs(v));
  if (cert.c_scale <= 1e-300) {
    cert.degenerate = true;
    return cert;  // nothing to certify against: fails
  }

  const int B = c.size();
  const int D = static_cast<int>(c.basis.front().entries().rows());

  // masked brackets expanded over the basis, as in the 2-cochain solver
  std::vector<std::vector<int>> qidx(B, std::vector<int>(B, -1));
  std::vector<TruncOperator> brackets;
  for (int i = 0; i < B; ++i)
    for (int j = i + 1; j < B; ++j) {
      qidx[i][j] = static_cast<int>(brackets.size());
      brackets.push_back(masked_commutator(c.basis[i], c.basis[j], c.window));
    }
  Mat E(D * D, B);
  for (int k = 0; k < B; ++k) E.col(k) = c.basis[k].entries().reshaped();
  Mat rhs(D * D, static_cast<int>(brackets.size()));
  for (std::size_t q = 0; q < brackets.size(); ++q)
    rhs.col(static_cast<int>(q)) = brackets[q].entries().reshaped();
  Eigen::BDCSVD<Mat> esvd(E, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Mat coeffs = esvd.solve(rhs);
  for (int q = 0; q < rhs.cols(); ++q) {
    const double nrm = rhs.col(q).norm();
    if (nrm == 0.0) continue;
    cert.expansion_residual =
        std::max(cert.expansion_residual,
                 (E * coeffs.col(q) - rhs.col(q)).norm() / nrm);
  }

  // unknowns: lambda on sorted basis triples
  std::vector<std::vector<std::vector<int>>> tidx(
      B, std::vector<std::vector<int>>(B, std::vector<int>(B, -1)));
  int T = 0;
  for (int p = 0; p < B; ++p)
    for (int q = p + 1; q < B; ++q)
      for (int s = q + 1; s < B; ++s) tidx[p][q][s] = T++;

  const auto triple_coeff = [&](int m, int w1, int w2, int* col) -> int {
    std::array<int, 3> v = {m, w1, w2};
    int sign = 1;
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) {
        if (v[a] == v[b]) return 0;
        if (v[a] > v[b]) {
          std::swap(v[a], v[b]);
          sign = -sign;
        }
      }
    *col = tidx[v[0]][v[1]][v[2]];
    return sign;
  };

  std::vector<std::array<int, 4>> quads;
  for (int i = 0; i < B; ++i)
    for (int j = i + 1; j < B; ++j)
      for (int k = j + 1; k < B; ++k)
        for (int l = k + 1; l < B; ++l) quads.push_back({i, j, k, l});
  const int Q = static_cast<int>(quads.size());

  Mat A = Mat::Zero(Q, T);
  Eigen::VectorXcd dvec(Q);
  for (int row = 0; row < Q; ++row) {
    const auto& x = quads[row];
    dvec(row) = c.value(x[0], x[1], x[2], x[3]);
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        // Chevalley-Eilenberg sign (-1)^{a+b} with 1-based positions
        const double sgn = ((a + b + 1) % 2 == 0) ? 1.0 : -1.0;
        int rest[2], n = 0;
        for (int u = 0; u < 4; ++u)
          if (u != a && u != b) rest[n++] = x[u];
        const int q = qidx[x[a]][x[b]];
        for (int m = 0; m < B; ++m) {
          const cplx alpha = coeffs(m, q);
          if (alpha == cplx(0.0)) continue;
          int col = -1;
          const int tsgn = triple_coeff(m, rest[0], rest[1], &col);
          if (tsgn != 0) A(row, col) += sgn * static_cast<double>(tsgn) * alpha;
        }
      }
  }

  Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXcd lam = svd.solve(dvec);
  const Eigen::VectorXcd misfit = A * lam - dvec;
  cert.best_misfit = misfit.cwiseAbs().maxCoeff();
  cert.pass = cert.best_misfit >= 0.1 * cert.c_scale;
  return cert;
}

CohomologousReport cohomologous_experiment(const BasisSpec& spec, int K,
                                           const CocycleConfig& cfg) {
  const CochainTable curv = curvature_trace_table(spec, K, cfg);
  const CochainTable schw = schwinger_table(spec, K, cfg);

  CohomologousReport rep;
  const double grid[] = {1.0, -1.0, 0.5, -0.5, 0.25, -0.25, 2.0, -2.0};
  for (const double nu : grid) {
    const CoboundarySolve fit = coboundary_solve(curv, scaled_table(schw, nu));
    rep.scanned.emplace_back(nu, fit.residual);
    if (fit.residual < rep.best_residual) {
      rep.best_residual = fit.residual;
      rep.best_nu = nu;
      rep.best_fit = fit;
    }
  }
  rep.cohomologous = rep.best_residual <= 1e-6;
  return rep;
}

}  // namespace circpdo
