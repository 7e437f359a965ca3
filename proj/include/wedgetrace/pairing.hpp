// SPDX-License-Identifier: Apache-2.0
#pragma once

// Cutoff profiles, the formal adjoint family in the half-weighted radial
// space, the boundary pairing of trace elements by radial quadrature, and
// transition-function smoothness diagnostics built on top of it.

#include <algorithm>
#include <string>
#include <vector>

#include "wedgetrace/linalg.hpp"
#include "wedgetrace/parallel.hpp"
#include "wedgetrace/trace.hpp"

namespace wedgetrace {

// Quintic smoothstep cutoff: 1 on (0, a], 0 on [b, oo), C^2 across both ends.
struct Cutoff {
  double a = 0.25;
  double b = 0.75;

  Cutoff() = default;
  Cutoff(double plateau_end, double support_end)
      : a(plateau_end), b(support_end) {
    if (!(0.0 < a && a < b)) throw ConfigError("cutoff needs 0 < a < b");
  }

  double value(double x) const {
    if (x <= a) return 1.0;
    if (x >= b) return 0.0;
    const double t = (x - a) / (b - a);
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  }

  // k-th derivative, k = 1..3; identically zero outside the transition. The
  // profile is C^2, so the third derivative jumps at a and b.
  double deriv(double x, int k) const {
    if (k < 1 || k > 3) throw ConfigError("cutoff derivative order must be 1..3");
    if (x <= a || x >= b) return 0.0;
    const double d = b - a;
    const double t = (x - a) / d;
    double s = 0.0;
    switch (k) {
      case 1: s = 30.0 * t * t * (1.0 - t) * (1.0 - t); break;
      case 2: s = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t); break;
      case 3: s = 60.0 * (1.0 - 6.0 * t + 6.0 * t * t); break;
    }
    double p = 1.0;
    for (int i = 0; i < k; ++i) p *= d;
    return -s / p;
  }
};

// Formal adjoint of the boundary family in x^{-m/2} L^2_b. From
// (xD_x)* = xD_x - i m and the commutation (xD_x - i m) x^{-m} = x^{-m} xD_x
// the shift cancels, leaving plain coefficient conjugate-transposes.
inline MatrixPolyFamily adjoint_family(const MatrixPolyFamily& F, int m) {
  if (m < F.degree())
    throw ConfigError("operator order below the family degree");
  return F.adjoint();
}

// Strip for the adjoint trace fiber: the reflection that keeps both radial
// integrals convergent and the pairing nondegenerate on the fixtures.
inline Strip adjoint_strip(const Strip& strip) { return strip.adjoint(); }

namespace detail {

// (xD_x)^j omega at x: (-i)^j sum_i S(j,i) x^i omega^{(i)}(x) with Stirling
// numbers of the second kind.
inline cx cutoff_xdx(const Cutoff& w, double x, int j) {
  if (j == 0) return cx(w.value(x));
  // S(j, i), i = 1..j, by the triangle recurrence.
  std::vector<double> stir(static_cast<size_t>(j) + 1, 0.0);
  stir[1] = 1.0;
  for (int row = 2; row <= j; ++row)
    for (int i = row; i >= 1; --i)
      stir[i] = static_cast<double>(i) * stir[i] + (i > 0 ? stir[i - 1] : 0.0);
  double sum = 0.0;
  double xp = 1.0;
  for (int i = 1; i <= j; ++i) {
    xp *= x;
    sum += stir[i] * xp * w.deriv(x, i);
  }
  cx rot(1.0);
  for (int i = 0; i < j; ++i) rot *= cx(0.0, -1.0);
  return rot * sum;
}

// Powers (xD_x)^p tau as trace elements, p = 0..degree.
inline std::vector<TraceElement> xdx_powers(const TraceElement& tau, int degree) {
  std::vector<TraceElement> out;
  out.reserve(static_cast<size_t>(degree) + 1);
  out.push_back(tau);
  for (int p = 1; p <= degree; ++p) {
    TraceElement next;
    for (const auto& t : out.back().terms) {
      next.add_term(t.sigma, t.ell, t.sigma * t.coeff);
      if (t.ell > 0)
        next.add_term(t.sigma, t.ell - 1,
                      cx(0.0, -static_cast<double>(t.ell)) * t.coeff);
    }
    out.push_back(std::move(next));
  }
  return out;
}

// P(xD_x)(omega tau) at x by the exact Leibniz split: cutoff derivatives stay
// confined to the transition, so the two inner products below never meet as a
// difference of large interior integrals.
struct CutoffAction {
  const PolyMat* P;
  const Cutoff* w;
  std::vector<TraceElement> powers;

  CutoffAction(const PolyMat& P_, const TraceElement& tau, const Cutoff& w_)
      : P(&P_), w(&w_), powers(xdx_powers(tau, P_.degree())) {}

  Vec value(double x) const {
    const int d = P->degree();
    Vec out = Vec::Zero(P->rows());
    for (int k = 0; k <= d; ++k) {
      const Mat& C = P->coeffs()[k];
      if (C.cwiseAbs().maxCoeff() == 0.0) continue;
      Vec inner = Vec::Zero(P->rows());
      double ck = 1.0;  // binom(k, j) built up multiplicatively
      for (int j = 0; j <= k; ++j) {
        if (j > 0) ck = ck * (k - j + 1) / j;
        const cx wj = cutoff_xdx(*w, x, j);
        if (wj != cx(0.0)) inner += (ck * wj) * powers[k - j].value(x);
      }
      out += C * inner;
    }
    return out;
  }
};

// Composite log-space quadrature with panel boundaries at the cutoff knots,
// where the profile is only C^2; splitting keeps each panel smooth.
inline std::vector<std::pair<double, double>> transition_nodes(
    const LogGrid& grid, const Cutoff& w, int panel_scale) {
  std::vector<double> cuts{grid.x0(), grid.x1()};
  if (w.a > grid.x0() && w.a < grid.x1()) cuts.push_back(w.a);
  if (w.b > grid.x0() && w.b < grid.x1()) cuts.push_back(w.b);
  std::sort(cuts.begin(), cuts.end());
  const double total = std::log(grid.x1() / grid.x0());
  std::vector<std::pair<double, double>> nodes;
  for (size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double frac = std::log(cuts[s + 1] / cuts[s]) / total;
    // Scale multiplies after the clamp so refinement stays a strict refinement
    // even when the requested grid is very coarse.
    const int panels =
        panel_scale *
        std::max(2, static_cast<int>(std::ceil(frac * grid.panels())));
    LogGrid seg(cuts[s], cuts[s + 1], panels, grid.order());
    for (size_t i = 0; i < seg.size(); ++i)
      nodes.emplace_back(seg.points()[i], seg.log_weights()[i]);
  }
  return nodes;
}

inline cx flat_pairing_on(const MatrixPolyFamily& F, double y,
                          const TraceElement& u, const TraceElement& v,
                          const Cutoff& w, const LogGrid& grid,
                          int panel_scale) {
  const PolyMat P = F.at_y(y);
  const PolyMat Q = F.adjoint().at_y(y);
  CutoffAction act_u(P, u, w);
  CutoffAction act_v(Q, v, w);
  // x^{-m} in both operators cancels the x^m of the measure exactly, so the
  // accumulated weight is plain dx/x.
  cx acc(0.0);
  for (const auto& [x, weight] : transition_nodes(grid, w, panel_scale)) {
    const double wx = w.value(x);
    const Vec uu = u.value(x), vv = v.value(x);
    const cx lhs = Vec(wx * vv).dot(act_u.value(x));
    const cx rhs = act_v.value(x).dot(Vec(wx * uu));
    acc += weight * (lhs - rhs);
  }
  return acc;
}

}  // namespace detail

// [u, v]_y = (A omega u, omega v) - (omega u, A* omega v) in the measure
// x^m dx/x with the fiber l2 inner product. For kernel elements the integrand
// is supported in the cutoff transition.
inline cx flat_pairing(const MatrixPolyFamily& F, double y,
                       const TraceElement& u, const TraceElement& v,
                       const Cutoff& w, const LogGrid& grid) {
  if (u.terms.empty() || v.terms.empty()) return cx(0.0);
  if (u.dim() != F.dim() || v.dim() != F.dim())
    throw ConfigError("trace element dimension mismatch");
  if (F.degree() > 3) throw ConfigError("cutoff pairing supports order <= 3");
  if (grid.x0() > w.a || grid.x1() < w.b)
    throw ConfigError("grid must cover the cutoff transition");
  const cx base = detail::flat_pairing_on(F, y, u, v, w, grid, 1);
  const cx fine = detail::flat_pairing_on(F, y, u, v, w, grid, 2);
  if (std::abs(base - fine) > 1e-6 * std::max(1.0, std::abs(base)))
    throw GridTooCoarse("pairing value unstable under grid refinement");
  return base;
}

struct PairingMatrix {
  double y = 0.0;
  Mat G;
  double cond = 0.0;
};

inline PairingMatrix pairing_matrix(const MatrixPolyFamily& F, double y,
                                    const std::vector<TraceElement>& basis,
                                    const std::vector<TraceElement>& adj_basis,
                                    const Cutoff& w, const LogGrid& grid) {
  PairingMatrix out;
  out.y = y;
  out.G = Mat(basis.size(), adj_basis.size());
  for (size_t j = 0; j < basis.size(); ++j)
    for (size_t l = 0; l < adj_basis.size(); ++l)
      out.G(static_cast<int>(j), static_cast<int>(l)) =
          flat_pairing(F, y, basis[j], adj_basis[l], w, grid);
  out.cond = condition_number(out.G);
  return out;
}

// Max relative deviation of the pairing matrix under a cutoff swap.
inline double cutoff_independence(const MatrixPolyFamily& F, double y,
                                  const std::vector<TraceElement>& basis,
                                  const std::vector<TraceElement>& adj_basis,
                                  const Cutoff& w1, const Cutoff& w2,
                                  const LogGrid& grid) {
  const Mat g1 = pairing_matrix(F, y, basis, adj_basis, w1, grid).G;
  const Mat g2 = pairing_matrix(F, y, basis, adj_basis, w2, grid).G;
  const double scale = std::max(1.0, g1.cwiseAbs().maxCoeff());
  return (g1 - g2).cwiseAbs().maxCoeff() / scale;
}

struct SmoothnessReport {
  std::vector<double> y;
  std::vector<Mat> field;          // transition matrix a(y) per grid point
  Eigen::MatrixXd second_diff;     // per-entry max |a(y+h) - 2a(y) + a(y-h)|
  double max_second_diff = 0.0;
};

// Transition functions between two frames against an adjoint frame: per y
// solve [tau'_j, tau*_l] = sum_k a_{kj} [tau_k, tau*_l], then report cyclic
// second differences of each entry as the smoothness proxy.
inline SmoothnessReport transition_smoothness(
    const MatrixPolyFamily& F, const TraceFrame& frame_a,
    const TraceFrame& frame_b, const TraceFrame& adj_frame, const Cutoff& w,
    const LogGrid& grid, const RunConfig& cfg = {}) {
  const size_t n = frame_a.y.size();
  if (frame_b.y.size() != n || adj_frame.y.size() != n || n < 3)
    throw ConfigError("frames must share a grid of at least three points");
  for (size_t i = 0; i < n; ++i)
    if (std::abs(frame_a.y[i] - frame_b.y[i]) > 1e-12 ||
        std::abs(frame_a.y[i] - adj_frame.y[i]) > 1e-12)
      throw ConfigError("frames must share the same y grid");

  SmoothnessReport rep;
  rep.y = frame_a.y;
  rep.field = parallel_map<Mat>(n, cfg.threads, [&](size_t i) {
    const double y = frame_a.y[i];
    const Mat ga =
        pairing_matrix(F, y, frame_a.elements[i], adj_frame.elements[i], w, grid)
            .G;
    const Mat gb =
        pairing_matrix(F, y, frame_b.elements[i], adj_frame.elements[i], w, grid)
            .G;
    if (ga.rows() != ga.cols() || condition_number(ga) > cfg.pairing_cond_bound)
      throw SingularPairing("pairing matrix singular at y = " + std::to_string(y));
    // [tau'_j, .] = sum_k a_{kj} [tau_k, .]  <=>  gb^T = ga^T a.
    return Mat(ga.transpose().partialPivLu().solve(gb.transpose()));
  });

  const int rows = rep.field[0].rows(), cols = rep.field[0].cols();
  rep.second_diff = Eigen::MatrixXd::Zero(rows, cols);
  for (size_t i = 0; i < n; ++i) {
    const Mat d2 = rep.field[(i + 1) % n] - 2.0 * rep.field[i] +
                   rep.field[(i + n - 1) % n];
    rep.second_diff =
        rep.second_diff.cwiseMax(Eigen::MatrixXd(d2.cwiseAbs()));
  }
  rep.max_second_diff = rep.second_diff.maxCoeff();
  return rep;
}

}  // namespace wedgetrace
