#include "circpdo/transport.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "circpdo/errors.hpp"

namespace circpdo {

namespace {

void check_grid(const std::vector<double>& t) {
  if (t.size() < 2) throw PreconditionError("path needs at least two nodes");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1]))
      throw PreconditionError("path grid must be strictly increasing");
}

// value and time derivative of the cubic Hermite interpolant on [t0, t1]
struct HermiteSeg {
  double t0, dt;
  const Mat *v0, *v1, *d0, *d1;

  Mat value(double t) const {
    const double u = (t - t0) / dt;
    const double h00 = (2 * u - 3) * u * u + 1;
    const double h10 = ((u - 2) * u + 1) * u;
    const double h01 = (3 - 2 * u) * u * u;
    const double h11 = (u - 1) * u * u;
    return h00 * (*v0) + (h10 * dt) * (*d0) + h01 * (*v1) + (h11 * dt) * (*d1);
  }
  Mat deriv(double t) const {
    const double u = (t - t0) / dt;
    const double g00 = 6 * u * (u - 1) / dt;
    const double g10 = (3 * u - 4) * u + 1;
    const double g01 = -6 * u * (u - 1) / dt;
    const double g11 = (3 * u - 2) * u;
    return g00 * (*v0) + g10 * (*d0) + g01 * (*v1) + g11 * (*d1);
  }
};

}  // namespace

PathSample PathSample::with_derivatives(std::vector<double> t,
                                        std::vector<TruncOperator> value,
                                        std::vector<TruncOperator> deriv) {
  PathSample p;
  p.t = std::move(t);
  p.value = std::move(value);
  p.deriv = std::move(deriv);
  p.mode = DerivMode::Analytic;
  p.validate();
  return p;
}

PathSample PathSample::finite_difference(std::vector<double> t,
                                         std::vector<TruncOperator> value) {
  PathSample p;
  p.t = std::move(t);
  p.value = std::move(value);
  p.mode = DerivMode::CentralFD;
  p.validate();
  return p;
}

void PathSample::validate() const {
  check_grid(t);
  if (value.size() != t.size())
    throw PreconditionError("path values do not match the grid");
  if (mode == DerivMode::Analytic && deriv.size() != t.size())
    throw PreconditionError("path derivatives do not match the grid");
  const int K = value.front().K(), r = value.front().rank();
  for (const auto& v : value)
    if (v.K() != K || v.rank() != r)
      throw PreconditionError("path values differ in shape");
  for (const auto& d : deriv)
    if (d.K() != K || d.rank() != r)
      throw PreconditionError("path derivatives differ in shape");
}

TruncOperator PathSample::derivative(int i) const {
  if (mode == DerivMode::Analytic) return deriv[i];
  const int n = nodes();
  if (n == 2) {
    Mat d = (value[1].entries() - value[0].entries()) / (t[1] - t[0]);
    return TruncOperator(value[0].K(), value[0].rank(), std::move(d));
  }
  // second-order 3-point stencil on a nonuniform grid; at the ends the
  // one-sided variant
  const int c = std::clamp(i, 1, n - 2);
  const double ta = t[c - 1], tb = t[c], tc = t[c + 1], tx = t[i];
  const double wa = ((tx - tb) + (tx - tc)) / ((ta - tb) * (ta - tc));
  const double wb = ((tx - ta) + (tx - tc)) / ((tb - ta) * (tb - tc));
  const double wc = ((tx - ta) + (tx - tb)) / ((tc - ta) * (tc - tb));
  Mat d = wa * value[c - 1].entries() + wb * value[c].entries() +
          wc * value[c + 1].entries();
  return TruncOperator(value[0].K(), value[0].rank(), std::move(d));
}

double horizontality_residual(const ConnectionForm& form,
                              const PathSample& path) {
  double worst = 0.0;
  for (int i = 0; i < path.nodes(); ++i) {
    const TruncOperator v = path.derivative(i);
    const TruncOperator theta = value_at(form, path.value[i], v);
    worst = std::max(worst, theta.norm() / (1.0 + v.norm()));
  }
  return worst;
}

namespace {

// endpoint-to-endpoint correction factors: g' = -theta_{gamma}(gamma') g
std::vector<Mat> integrate_correction(const ConnectionForm& form,
                                      const PathSample& gamma, int substeps) {
  const int K = gamma.value.front().K(), r = gamma.value.front().rank();
  const int dim = (2 * K + 1) * r;

  std::vector<Mat> derivs;
  derivs.reserve(gamma.nodes());
  for (int i = 0; i < gamma.nodes(); ++i)
    derivs.push_back(gamma.derivative(i).entries());

  const auto rhs = [&](const HermiteSeg& seg, double t, const Mat& g) -> Mat {
    const TruncOperator gv(K, r, seg.value(t));
    const TruncOperator gd(K, r, seg.deriv(t));
    return -value_at(form, gv, gd).entries() * g;
  };

  std::vector<Mat> g_nodes;
  g_nodes.reserve(gamma.nodes());
  Mat g = Mat::Identity(dim, dim);
  g_nodes.push_back(g);
  for (int i = 0; i + 1 < gamma.nodes(); ++i) {
    HermiteSeg seg{gamma.t[i], gamma.t[i + 1] - gamma.t[i],
                   &gamma.value[i].entries(), &gamma.value[i + 1].entries(),
                   &derivs[i], &derivs[i + 1]};
    const double h = seg.dt / substeps;
    for (int s = 0; s < substeps; ++s) {
      const double ts = gamma.t[i] + s * h;
      const Mat k1 = rhs(seg, ts, g);
      const Mat k2 = rhs(seg, ts + h / 2, g + (h / 2) * k1);
      const Mat k3 = rhs(seg, ts + h / 2, g + (h / 2) * k2);
      const Mat k4 = rhs(seg, ts + h, g + h * k3);
      g += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    g_nodes.push_back(g);
  }
  return g_nodes;
}

TransportResult assemble(const ConnectionForm& form, const PathSample& gamma,
                         const std::vector<Mat>& g_nodes, int substeps) {
  const int K = gamma.value.front().K(), r = gamma.value.front().rank();
  std::vector<TruncOperator> value, deriv;
  value.reserve(gamma.nodes());
  deriv.reserve(gamma.nodes());
  for (int i = 0; i < gamma.nodes(); ++i) {
    const Mat& gam = gamma.value[i].entries();
    const Mat gam_d = gamma.derivative(i).entries();
    const TruncOperator theta = value_at(form, gamma.value[i],
                                         TruncOperator(K, r, gam_d));
    // the corrected derivative stays consistent with the integrated
    // equation, so the residual measures the algebra and not the stepper
    const Mat g_d = -theta.entries() * g_nodes[i];
    value.emplace_back(K, r, gam * g_nodes[i]);
    deriv.emplace_back(K, r, gam_d * g_nodes[i] + gam * g_d);
  }
  TransportResult out;
  out.path = PathSample::with_derivatives(gamma.t, std::move(value),
                                          std::move(deriv));
  out.substeps_used = substeps;
  out.residual = horizontality_residual(form, out.path);
  return out;
}

}  // namespace

TransportResult horizontal_project(const ConnectionForm& form,
                                   const PathSample& gamma,
                                   const TransportConfig& cfg) {
  gamma.validate();
  if (cfg.substeps < 1 || cfg.max_substeps < cfg.substeps)
    throw PreconditionError("bad substep bounds");

  int substeps = cfg.substeps;
  std::vector<Mat> g_nodes = integrate_correction(form, gamma, substeps);
  if (cfg.adaptive) {
    while (2 * substeps <= cfg.max_substeps) {
      std::vector<Mat> finer = integrate_correction(form, gamma, 2 * substeps);
      const double gap = (finer.back() - g_nodes.back()).norm() /
                         (1.0 + finer.back().norm());
      g_nodes = std::move(finer);
      substeps *= 2;
      if (gap <= cfg.ode_tol) break;
    }
  }

  TransportResult out = assemble(form, gamma, g_nodes, substeps);
  if (out.residual > cfg.tol)
    throw ToleranceError(
        "horizontality tolerance unreachable at minimum step", out.residual);
  return out;
}

double equivariance_check(const ConnectionForm& form, const PathSample& gamma,
                          const TruncOperator& h, const TransportConfig& cfg) {
  gamma.validate();
  const TransportResult base = horizontal_project(form, gamma, cfg);

  std::vector<TruncOperator> shifted;
  shifted.reserve(gamma.nodes());
  for (const auto& v : gamma.value) shifted.push_back(multiply(v, h));
  PathSample moved;
  if (gamma.mode == DerivMode::Analytic) {
    std::vector<TruncOperator> shifted_d;
    shifted_d.reserve(gamma.nodes());
    for (const auto& d : gamma.deriv) shifted_d.push_back(multiply(d, h));
    moved = PathSample::with_derivatives(gamma.t, std::move(shifted),
                                         std::move(shifted_d));
  } else {
    moved = PathSample::finite_difference(gamma.t, std::move(shifted));
  }
  const TransportResult acted = horizontal_project(form, moved, cfg);

  double worst = 0.0;
  for (int i = 0; i < gamma.nodes(); ++i) {
    const TruncOperator lhs = acted.path.value[i];
    const TruncOperator rhs = multiply(base.path.value[i], h);
    worst = std::max(worst,
                     (lhs - rhs).norm() / (1.0 + rhs.norm()));
  }
  return worst;
}

LiftResult horizontal_lift(const ConnectionForm& form, const SymbolPath& base,
                           const BundleElement& start,
                           const TransportConfig& cfg,
                           const BundleConfig& bundle_cfg) {
  check_grid(base.t);
  if (base.x.size() != base.t.size())
    throw PreconditionError("symbol path does not match the grid");
  if (max_coeff_diff(base.x.front(), start.base) >
      1e-12 * (1.0 + start.base.max_abs()))
    throw PreconditionError("start element does not sit over the first node");
  for (const auto& x : base.x) {
    double bad = 0.0;
    if (!x.elliptic_at_order0(&bad))
      throw EllipticityError("symbol path loses ellipticity", bad);
  }

  const int K = start.total.K();
  std::vector<TruncOperator> quantized;
  quantized.reserve(base.x.size());
  for (const auto& x : base.x) quantized.push_back(quantize(x, K));

  // constant correction so the lift starts exactly at the given element;
  // it is smoothing-sized because the start element is
  const TruncOperator corr = start.total - quantized.front();
  std::vector<TruncOperator> gamma;
  gamma.reserve(quantized.size());
  for (const auto& q : quantized) gamma.push_back(q + corr);

  const TransportResult moved = horizontal_project(
      form, PathSample::finite_difference(base.t, std::move(gamma)), cfg);

  LiftResult out;
  out.base = base;
  out.path = moved.path;
  out.residual = moved.residual;
  out.substeps_used = moved.substeps_used;
  out.node_defects.reserve(base.x.size());
  for (std::size_t i = 0; i < base.x.size(); ++i)
    out.node_defects.push_back(decay_profile(
        moved.path.value[i] - quantized[i], bundle_cfg.defect_p));
  return out;
}

SymbolPath RadialMap::path_to(const FormalSymbol& x) const {
  if (nodes < 2) throw PreconditionError("radial map needs at least two nodes");
  SymbolPath p;
  p.t.reserve(nodes);
  p.x.reserve(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double u = static_cast<double>(i) / (nodes - 1);
    p.t.push_back(u);
    if (i == 0)
      p.x.push_back(center);
    else if (i == nodes - 1)
      p.x.push_back(x);
    else
      p.x.push_back(center.scaled(1.0 - u) + x.scaled(u));
    double bad = 0.0;
    if (!p.x.back().elliptic_at_order0(&bad))
      throw EllipticityError("radial path loses ellipticity", bad);
  }
  return p;
}

BundleElement local_trivialize(const ConnectionForm& form, const RadialMap& rad,
                               const FormalSymbol& x, const TruncOperator& g,
                               const TransportConfig& cfg,
                               const BundleConfig& bundle_cfg) {
  const SymbolPath path = rad.path_to(x);
  const BundleElement start =
      make_bundle_element(rad.center, std::nullopt, g.K(), bundle_cfg);
  const LiftResult lift = horizontal_lift(form, path, start, cfg, bundle_cfg);
  const TruncOperator total = multiply(lift.path.value.back(), g);
  const TruncOperator defect = total - quantize(x, g.K());
  return make_bundle_element(x, defect, g.K(), bundle_cfg);
}

}  // namespace circpdo
