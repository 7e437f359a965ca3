// SPDX-License-Identifier: Apache-2.0
#pragma once

// Principal-part extraction along contours, Jordan-chain trace elements, the
// inverse-Mellin correspondence between pole data and x^{i sigma} log^l x
// expansions, the x d/dx endomorphism on a trace basis, continuation of a
// basis frame over the parameter circle, and a cutoff Mellin quadrature.

#include <algorithm>
#include <concepts>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "wedgetrace/parallel.hpp"
#include "wedgetrace/singular.hpp"
#include "wedgetrace/spectra.hpp"

namespace wedgetrace {

// ---------------------------------------------------------------------------
// Principal parts
// ---------------------------------------------------------------------------

namespace detail {

struct PoleSite {
  cx sigma;
  int max_order = 1;
};

// Residue extraction on small circles: coefficient of (sigma - sigma_p)^{-l}
// is the normalized contour integral of (zeta - sigma_p)^{l-1} f(zeta) on a
// circle separating sigma_p from every other pole in `all_poles`.
inline SingularPart extract_singular_part(
    const std::function<Vec(cx)>& f, const std::vector<PoleSite>& wanted,
    const std::vector<cx>& all_poles, double radius_cap, int nodes = 128) {
  SingularPart out;
  for (const auto& site : wanted) {
    double nearest = std::numeric_limits<double>::infinity();
    for (cx q : all_poles) {
      const double d = std::abs(q - site.sigma);
      if (d > 1e-9 * std::max(1.0, std::abs(site.sigma)))
        nearest = std::min(nearest, d);
    }
    const double floor = 1e-4 * std::max(1.0, std::abs(site.sigma));
    if (0.5 * nearest < floor)
      throw PoleSeparationFailure("distinct poles are too close to separate");
    const double rho = std::min(0.5 * nearest, radius_cap);
    const Contour circle = Contour::circle(site.sigma, rho, nodes);

    PolePart part;
    part.sigma = site.sigma;
    double top = 0.0;
    for (int l = 1; l <= site.max_order; ++l) {
      Vec c;
      for (int j = 0; j < nodes; ++j) {
        const double t = static_cast<double>(j) / nodes;
        const cx z = circle.point(t);
        const cx w = circle.tangent(t) /
                     (cx(0.0, 2.0 * kPi) * static_cast<double>(nodes));
        cx pw(1.0);
        for (int i = 1; i < l; ++i) pw *= (z - site.sigma);
        const Vec fz = f(z);
        if (c.size() == 0) c = Vec::Zero(fz.size());
        c += (w * pw) * fz;
      }
      if (!c.allFinite())
        throw NodeOnSingularity("principal-part integrand overflowed");
      part.coeff.push_back(c);
      top = std::max(top, c.cwiseAbs().maxCoeff());
    }
    // Trim trailing orders that carry no mass; drop the pole if nothing does.
    while (!part.coeff.empty() &&
           part.coeff.back().cwiseAbs().maxCoeff() <= 1e-11 * std::max(1.0, top))
      part.coeff.pop_back();
    if (!part.coeff.empty()) out.poles.push_back(std::move(part));
  }
  std::sort(out.poles.begin(), out.poles.end(),
            [](const PolePart& a, const PolePart& b) {
              return detail::sigma_less(a.sigma, b.sigma);
            });
  return out;
}

// Full pole list of F^{-1} with defective splittings merged, so separation
// radii are measured between genuinely distinct poles.
inline std::vector<cx> clustered_poles(const PolyMat& P, const RunConfig& cfg) {
  std::vector<cx> centers;
  for (const auto& c :
       cluster_values(companion_eigenvalues(P, cfg.rank_tol), cfg.match_tol))
    centers.push_back(c.center);
  return centers;
}

inline double contour_height(const Contour& contour) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const int n = contour.nodes();
  for (int j = 0; j < n; ++j) {
    const double im = contour.point(static_cast<double>(j) / n).imag();
    lo = std::min(lo, im);
    hi = std::max(hi, im);
  }
  return hi - lo;
}

}  // namespace detail

// Principal part of sigma -> F(y, sigma)^{-1} rhs(sigma) at every pole inside
// the contour. Pole locations and orders come from the contour eigensolver;
// the small-circle radii separate each pole from the full spectrum of F.
inline SingularPart singular_part(const MatrixPolyFamily& F, double y,
                                  const Contour& contour, const PolyMat& rhs,
                                  const RunConfig& cfg = {}) {
  if (rhs.cols() != 1) throw ConfigError("right-hand side must be a column");
  const PolyMat P = F.at_y(y);
  if (rhs.rows() != P.rows())
    throw ConfigError("right-hand side dimension mismatch");
  const auto points = contour_solve(F, y, contour, P.rows(), cfg);
  std::vector<detail::PoleSite> wanted;
  for (const auto& pt : points)
    wanted.push_back({pt.sigma, pt.partials_resolved && !pt.partials.empty()
                                    ? pt.partials[0]
                                    : pt.mult});
  const std::vector<cx> all = detail::clustered_poles(P, cfg);
  auto f = [&](cx z) { return Vec(P.eval(z).partialPivLu().solve(rhs.eval(z))); };
  return detail::extract_singular_part(f, wanted, all,
                                       0.1 * detail::contour_height(contour));
}

// ---------------------------------------------------------------------------
// Inverse-Mellin correspondence
// ---------------------------------------------------------------------------

// Residue-exact dictionary: c (sigma - sigma0)^{-k} corresponds to
// (-i) (i log x)^{k-1} / (k-1)! c x^{i sigma0}. The -i per simple pole is the
// residue value of the inverting integral; it is kept exact here rather than
// matching any particular printed constant.
inline TraceElement to_trace_element(const SingularPart& sp) {
  TraceElement out;
  for (const auto& p : sp.poles) {
    cx factor(0.0, -1.0);  // -i * i^{k-1} / (k-1)! built up incrementally
    for (int k = 1; k <= p.order(); ++k) {
      out.add_term(p.sigma, k - 1, factor * p.coeff[k - 1]);
      factor *= cx(0.0, 1.0) / static_cast<double>(k);
    }
  }
  out.prune();
  return out;
}

// ---------------------------------------------------------------------------
// Indicial action and the x d/dx endomorphism
// ---------------------------------------------------------------------------

// Apply x^{-m} P(xD_x) to a trace element with the exact shift rules
//   (xD_x)(x^{i s} log^l x) = s x^{i s} log^l x - i l x^{i s} log^{l-1} x,
// then absorb x^{-m} as s -> s + i m. For kernel elements the coefficient
// norm of the result is the membership residual.
inline TraceElement apply_indicial(const MatrixPolyFamily& F, double y,
                                   const TraceElement& tau) {
  const PolyMat P = F.at_y(y);
  const int m = P.degree();
  const cx shift(0.0, static_cast<double>(m));
  TraceElement out;
  for (const auto& term : tau.terms) {
    // Scalar ladder: coefficients of log^l after j applications of xD_x.
    std::map<int, cx> cur{{term.ell, cx(1.0)}};
    for (int j = 0; j <= P.degree(); ++j) {
      const Mat& C = P.coeffs()[j];
      if (j > 0) {
        std::map<int, cx> next;
        for (const auto& [l, c] : cur) {
          next[l] += term.sigma * c;
          if (l > 0) next[l - 1] += cx(0.0, -static_cast<double>(l)) * c;
        }
        cur = std::move(next);
      }
      if (C.cwiseAbs().maxCoeff() == 0.0) continue;
      const Vec w = C * term.coeff;
      for (const auto& [l, c] : cur)
        if (c != cx(0.0)) out.add_term(term.sigma + shift, l, c * w);
    }
  }
  out.prune();
  return out;
}

// Matrix of tau -> x d/dx tau in the given basis, using
//   x d/dx (x^{i s} log^l x) = i s x^{i s} log^l x + l x^{i s} log^{l-1} x.
// Throws NotInvariant when some image leaves the span of the basis.
inline Mat xdx_endomorphism(const std::vector<TraceElement>& basis,
                            double rank_tol = 1e-10) {
  const int n = static_cast<int>(basis.size());
  if (n == 0) throw ConfigError("empty basis");
  const int dim = basis[0].dim();
  std::vector<TraceElement> images;
  images.reserve(basis.size());
  for (const auto& e : basis) {
    TraceElement img;
    for (const auto& term : e.terms) {
      img.add_term(term.sigma, term.ell, cx(0.0, 1.0) * term.sigma * term.coeff);
      if (term.ell > 0)
        img.add_term(term.sigma, term.ell - 1,
                     static_cast<double>(term.ell) * term.coeff);
    }
    img.prune();
    images.push_back(std::move(img));
  }
  std::vector<TraceElement> all = basis;
  all.insert(all.end(), images.begin(), images.end());
  TermKeys keys = TermKeys::collect(all);
  const int rows = static_cast<int>(keys.size()) * dim;
  Mat B(rows, n), X(rows, n);
  for (int j = 0; j < n; ++j) {
    B.col(j) = keys.flatten(basis[j], dim);
    X.col(j) = keys.flatten(images[j], dim);
  }
  Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Mat M(n, n);
  double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
  for (int j = 0; j < n; ++j) {
    const Vec coords = svd.solve(X.col(j));
    const double res = (B * coords - X.col(j)).norm();
    if (res > rank_tol * scale * 100.0)
      throw NotInvariant("x d/dx image leaves the basis span");
    M.col(j) = coords;
  }
  return M;
}

// ---------------------------------------------------------------------------
// Trace fiber bases
// ---------------------------------------------------------------------------

namespace detail {

// Jordan chains at one spectrum point: v_0 in ker F(sigma0) and
//   sum_{i=0..k} F^{(i)}(sigma0)/i! v_{k-i} = 0  for k = 1..L-1.
// Each chain of length L yields L elements (its truncations); the element for
// depth s has singular part sum_t v_{s-t} (sigma - sigma0)^{-(t+1)}.
inline void chain_elements_at(const PolyMat& P, const SpectrumPoint& pt,
                              double rank_tol,
                              std::vector<SingularPart>* parts) {
  std::vector<Mat> deriv;  // F^{(i)}(sigma0) / i!
  for (int i = 0; i <= 3 + pt.mult; ++i) deriv.push_back(P.taylor_coeff(pt.sigma, i));

  // Kernel and chain solves need a threshold absolute against the Taylor
  // scale: at a simple root of a scalar family the evaluated matrix is tiny
  // but nonzero, and a relative cut would call it invertible.
  double scale = 0.0;
  for (const auto& d : deriv) scale = std::max(scale, d.cwiseAbs().maxCoeff());
  const double cut = rank_tol * std::max(scale, 1e-300);
  Eigen::JacobiSVD<Mat> svd(deriv[0], Eigen::ComputeFullU | Eigen::ComputeFullV);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > cut) ++rank;
  const Mat kernel = svd.matrixV().rightCols(deriv[0].cols() - rank);
  auto solve_abs = [&](const Vec& b) {
    Vec z = svd.matrixU().adjoint() * b;
    for (int i = 0; i < z.size(); ++i)
      z(i) = i < rank ? z(i) / svd.singularValues()(i) : cx(0.0);
    return Vec(svd.matrixV() * z);
  };
  std::vector<int> lengths = pt.partials;
  if (!pt.partials_resolved || lengths.empty())
    lengths.assign(std::max<std::size_t>(1, static_cast<std::size_t>(kernel.cols())), 1);
  for (size_t chain = 0; chain < lengths.size(); ++chain) {
    if (static_cast<int>(chain) >= kernel.cols()) break;
    std::vector<Vec> v{Vec(kernel.col(chain))};
    for (int k = 1; k < lengths[chain]; ++k) {
      Vec rhs = Vec::Zero(P.rows());
      for (int i = 1; i <= k; ++i) rhs -= deriv[i] * v[k - i];
      v.push_back(solve_abs(rhs));
    }
    for (int s = 0; s < lengths[chain]; ++s) {
      SingularPart sp;
      PolePart part;
      part.sigma = pt.sigma;
      for (int t = 0; t <= s; ++t) part.coeff.push_back(v[s - t]);
      sp.poles.push_back(std::move(part));
      parts->push_back(std::move(sp));
    }
  }
}

inline std::vector<SingularPart> fiber_singular_parts(
    const PolyMat& P, const std::vector<SpectrumPoint>& points, double rank_tol) {
  std::vector<SingularPart> parts;
  for (const auto& pt : points) chain_elements_at(P, pt, rank_tol, &parts);
  return parts;
}

}  // namespace detail

// Pointwise basis of the trace fiber at y: Jordan chains at every strip
// spectrum point, passed through the inverse-Mellin dictionary and the shared
// normalization. Cardinality equals the total algebraic multiplicity.
inline std::vector<TraceElement> trace_fiber_basis(const MatrixPolyFamily& F,
                                                   double y, const Strip& strip,
                                                   const RunConfig& cfg = {}) {
  const PolyMat P = F.at_y(y);
  const auto points = companion_solve(F, y, strip, cfg);
  std::vector<TraceElement> out;
  for (const auto& sp : detail::fiber_singular_parts(P, points, cfg.rank_tol))
    out.push_back(normalize_trace_element(to_trace_element(sp)));
  return out;
}

// ---------------------------------------------------------------------------
// Frame continuation
// ---------------------------------------------------------------------------

struct TraceFrame {
  std::vector<double> y;
  std::vector<std::vector<TraceElement>> elements;  // per y, one per basis slot
  std::string provenance;
};

// Continue the y0 basis over the grid: the element chi_j at y is the singular
// part of F(., y)^{-1} [F(., y0) chi_j(., y0)], whose bracket is entire, so
// the only poles are the spectrum at y. The result stays full-rank through
// collisions by construction.
inline TraceFrame frame_continuation(const MatrixPolyFamily& F, double y0,
                                     int grid_n, const Contour& contour,
                                     const RunConfig& cfg = {}) {
  if (grid_n < 1) throw ConfigError("frame grid needs at least one point");
  const PolyMat P0 = F.at_y(y0);
  const auto base_points = contour_solve(F, y0, contour, P0.rows(), cfg);
  const auto base_parts =
      detail::fiber_singular_parts(P0, base_points, cfg.rank_tol);
  if (base_parts.empty()) throw DegenerateFamily("no spectrum inside the contour");
  const double cap = 0.1 * detail::contour_height(contour);

  TraceFrame frame;
  frame.provenance = "continued";
  frame.y.resize(grid_n);
  for (int j = 0; j < grid_n; ++j) frame.y[j] = 2.0 * kPi * j / grid_n;

  frame.elements = parallel_map<std::vector<TraceElement>>(
      grid_n, cfg.threads, [&](int j) {
        const double yj = frame.y[j];
        const PolyMat P = F.at_y(yj);
        const auto points = contour_solve(F, yj, contour, P.rows(), cfg);
        std::vector<detail::PoleSite> wanted;
        for (const auto& pt : points)
          wanted.push_back({pt.sigma, pt.partials_resolved && !pt.partials.empty()
                                          ? pt.partials[0]
                                          : pt.mult});
        const std::vector<cx> all = detail::clustered_poles(P, cfg);
        std::vector<TraceElement> row;
        row.reserve(base_parts.size());
        for (const auto& chi : base_parts) {
          auto f = [&](cx z) {
            const Vec bracket = P0.eval(z) * chi.value(z);
            return Vec(P.eval(z).partialPivLu().solve(bracket));
          };
          row.push_back(to_trace_element(
              detail::extract_singular_part(f, wanted, all, cap)));
        }
        return row;
      });

  // Full-rank audit at every grid point.
  for (int j = 0; j < grid_n; ++j) {
    const auto& row = frame.elements[j];
    const int dim = row.empty() ? 0 : row[0].dim();
    TermKeys keys = TermKeys::collect(row);
    Mat B(static_cast<int>(keys.size()) * dim, static_cast<int>(row.size()));
    for (size_t c = 0; c < row.size(); ++c)
      B.col(static_cast<int>(c)) = keys.flatten(row[c], dim);
    if (numeric_rank(B, cfg.rank_tol) < static_cast<int>(row.size()))
      throw RankLoss("continued frame lost rank at y = " + std::to_string(frame.y[j]));
  }
  return frame;
}

// ---------------------------------------------------------------------------
// Mellin quadrature
// ---------------------------------------------------------------------------

// Cutoff Mellin transform on a logarithmic grid: integral of
// x^{-i sigma} u(x) dx/x over the grid support. Converges when Im sigma
// exceeds the growth exponent of u at 0.
inline cx mellin_quadrature(const LogGrid& grid, const std::vector<cx>& samples,
                            cx sigma) {
  const auto& pts = grid.points();
  if (samples.size() != pts.size())
    throw ConfigError("sample count does not match the grid");
  const auto& w = grid.log_weights();
  cx acc(0.0);
  for (size_t j = 0; j < pts.size(); ++j)
    acc += w[j] * std::exp(cx(0.0, -1.0) * sigma * std::log(pts[j])) * samples[j];
  return acc;
}

template <class U>
  requires std::invocable<U&, double>
cx mellin_quadrature(const LogGrid& grid, U&& u, cx sigma) {
  const auto& pts = grid.points();
  std::vector<cx> samples(pts.size());
  for (size_t j = 0; j < pts.size(); ++j) samples[j] = u(pts[j]);
  return mellin_quadrature(grid, samples, sigma);
}

}  // namespace wedgetrace
