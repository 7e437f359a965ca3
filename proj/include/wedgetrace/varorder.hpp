// SPDX-License-Identifier: Apache-2.0
#pragma once

// Matrix powers by resolvent contour quadrature, spectral disk decompositions
// with Riesz projections, symbol-class slope checks, variable-order Sobolev
// norms on the parameter circle, and the trace variant driven by the x d/dx
// endomorphism of a trace frame.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "wedgetrace/errors.hpp"
#include "wedgetrace/family.hpp"
#include "wedgetrace/types.hpp"

namespace wedgetrace {

// Smooth endomorphism of the trivial rank-r bundle over the parameter circle.
struct EndomorphismField {
  TrigMat a;

  explicit EndomorphismField(TrigMat m) : a(std::move(m)) {
    if (a.rows() != a.cols() || a.rows() == 0)
      throw ConfigError("endomorphism field must be square");
  }
  static EndomorphismField constant(const Mat& m) {
    return EndomorphismField(TrigMat::constant(m));
  }

  int rank() const { return a.rows(); }
  Mat at(double y) const { return a.value(y); }
};

// Scalar metric g(y) > 0 on the parameter circle and its Japanese bracket
// <eta>_y = (1 + g(y) eta^2)^{1/2}.
struct BracketMetric {
  TrigPoly g = TrigPoly::constant(cx(1.0));

  BracketMetric() = default;
  explicit BracketMetric(TrigPoly gg) : g(std::move(gg)) {
    for (int j = 0; j < 512; ++j) {
      const cx v = g.value(2.0 * kPi * j / 512.0);
      if (!(v.real() > 0.0) || std::abs(v.imag()) > 1e-12 * std::abs(v))
        throw ConfigError("metric must be positive on the circle");
    }
  }

  double bracket(double y, double eta) const {
    return std::sqrt(1.0 + g.value(y).real() * eta * eta);
  }
};

// rho^a = (i/2pi) oint rho^sigma (a - sigma)^{-1} dsigma over a circle
// enclosing the spectrum. Trapezoid quadrature converges geometrically in the
// node count as long as the spectrum keeps clear of the contour.
inline Mat matrix_power(const Mat& a, double rho, int nodes = 256) {
  if (!(rho > 0.0)) throw ConfigError("matrix power needs rho > 0");
  if (a.rows() != a.cols() || a.rows() == 0)
    throw ConfigError("matrix power needs a square matrix");
  if (nodes < 4) throw ConfigError("matrix power needs at least 4 nodes");

  // Size the contour from the trace mean and a Gershgorin enclosure; unlike
  // an iterative eigensolve this cannot fail and is exact for diagonals.
  const cx center = a.trace() / static_cast<double>(a.rows());
  double spread = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    double row = std::abs(a(i, i) - center);
    for (int j = 0; j < a.cols(); ++j)
      if (j != i) row += std::abs(a(i, j));
    spread = std::max(spread, row);
  }
  const double radius = std::max(0.5, 1.2 * spread + 0.2);

  const double spacing = 2.0 * kPi * radius / nodes;
  if (radius - spread < 2.0 * spacing)
    throw ContourTooTight("spectrum within two node spacings of the contour");

  const cx lrho = std::log(cx(rho));
  const Mat id = Mat::Identity(a.rows(), a.cols());
  Mat acc = Mat::Zero(a.rows(), a.cols());
  for (int j = 0; j < nodes; ++j) {
    const double t = 2.0 * kPi * j / nodes;
    const cx unit(std::cos(t), std::sin(t));
    const cx sigma = center + radius * unit;
    const Mat resolvent = (a - sigma * id).partialPivLu().solve(id);
    acc += (std::exp(sigma * lrho) * unit) * resolvent;
  }
  return Mat((-radius / nodes) * acc);
}

// Riesz projection onto the spectral subspace enclosed by the given disk.
inline Mat riesz_projection(const Mat& a, cx center, double radius,
                            int nodes = 128) {
  const Mat id = Mat::Identity(a.rows(), a.cols());
  Mat acc = Mat::Zero(a.rows(), a.cols());
  for (int j = 0; j < nodes; ++j) {
    const double t = 2.0 * kPi * j / nodes;
    const cx unit(std::cos(t), std::sin(t));
    const cx sigma = center + radius * unit;
    acc += unit * Mat((sigma * id - a).partialPivLu().solve(id));
  }
  return Mat((radius / nodes) * acc);
}

// Disjoint spectral disks of diameter below delta around the clustered
// spectrum at y0, with the largest parameter interval on which the moving
// spectrum stays inside the disks, and Riesz projections tabulated there.
struct AdmissibleDecomposition {
  double y0 = 0.0;
  double delta = 0.25;
  std::vector<cx> centers;
  std::vector<double> radius;
  double half_width = 0.0;  // U = [y0 - half_width, y0 + half_width]
  bool covers_all = false;
  std::vector<double> ys;                      // tabulation grid across U
  std::vector<std::vector<Mat>> projections;   // [disk][grid point]

  std::size_t disks() const { return centers.size(); }
};

namespace detail {

inline std::vector<cx> spectrum_of(const Mat& a) {
  Eigen::ComplexEigenSolver<Mat> eig(a);
  if (eig.info() != Eigen::Success)
    throw DegenerateFamily("eigenvalue iteration failed");
  return {eig.eigenvalues().data(),
          eig.eigenvalues().data() + eig.eigenvalues().size()};
}

inline bool spectrum_inside(const Mat& a, const std::vector<cx>& centers,
                            const std::vector<double>& radius) {
  for (const cx& l : spectrum_of(a)) {
    bool hit = false;
    for (std::size_t k = 0; k < centers.size() && !hit; ++k)
      hit = std::abs(l - centers[k]) <= radius[k];
    if (!hit) return false;
  }
  return true;
}

inline bool interval_inside(const EndomorphismField& field, double y0,
                            double hw, const std::vector<cx>& centers,
                            const std::vector<double>& radius) {
  // Containment is required with a quarter-radius margin so the projection
  // quadrature keeps the poles safely away from its contour even at the
  // boundary of the validity interval.
  std::vector<double> shrunk(radius);
  for (double& r : shrunk) r *= 0.75;
  for (int j = 0; j <= 32; ++j) {
    const double y = y0 - hw + 2.0 * hw * j / 32.0;
    if (!spectrum_inside(field.at(y), centers, shrunk)) return false;
  }
  return true;
}

}  // namespace detail

inline AdmissibleDecomposition admissible_decomposition(
    const EndomorphismField& field, double y0, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0,1)");

  const std::vector<cx> lam = detail::spectrum_of(field.at(y0));
  const int n = static_cast<int>(lam.size());

  // Greedy chaining: eigenvalues closer than delta/2 share a disk.
  std::vector<int> label(n);
  for (int i = 0; i < n; ++i) label[i] = i;
  const auto root_of = [&](int i) {
    while (label[i] != i) i = label[i] = label[label[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(lam[i] - lam[j]) <= 0.5 * delta)
        label[root_of(i)] = root_of(j);

  AdmissibleDecomposition out;
  out.y0 = y0;
  out.delta = delta;
  std::vector<double> spread;
  std::vector<int> seen;
  for (int i = 0; i < n; ++i) {
    const int r = root_of(i);
    auto it = std::find(seen.begin(), seen.end(), r);
    std::size_t k;
    if (it == seen.end()) {
      seen.push_back(r);
      out.centers.push_back(cx(0.0));
      spread.push_back(0.0);
      k = out.centers.size() - 1;
    } else {
      k = static_cast<std::size_t>(it - seen.begin());
    }
    out.centers[k] += lam[i];
  }
  std::vector<int> count(out.centers.size(), 0);
  for (int i = 0; i < n; ++i)
    ++count[static_cast<std::size_t>(
        std::find(seen.begin(), seen.end(), root_of(i)) - seen.begin())];
  for (std::size_t k = 0; k < out.centers.size(); ++k)
    out.centers[k] /= static_cast<double>(count[k]);
  for (int i = 0; i < n; ++i) {
    const std::size_t k = static_cast<std::size_t>(
        std::find(seen.begin(), seen.end(), root_of(i)) - seen.begin());
    spread[k] = std::max(spread[k], std::abs(lam[i] - out.centers[k]));
  }

  // Deterministic disk order.
  std::vector<std::size_t> order(out.centers.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const cx ca = out.centers[a], cb = out.centers[b];
    if (ca.real() != cb.real()) return ca.real() < cb.real();
    return ca.imag() < cb.imag();
  });
  {
    std::vector<cx> c2;
    std::vector<double> s2;
    for (std::size_t k : order) {
      c2.push_back(out.centers[k]);
      s2.push_back(spread[k]);
    }
    out.centers = std::move(c2);
    spread = std::move(s2);
  }

  // Disk radii: capped by delta/2, kept clear of the nearest other disk, and
  // required to contain their cluster with margin.
  out.radius.resize(out.centers.size());
  for (std::size_t k = 0; k < out.centers.size(); ++k) {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < out.centers.size(); ++l)
      if (l != k) gap = std::min(gap, std::abs(out.centers[k] - out.centers[l]));
    out.radius[k] = std::min(0.49 * delta, 0.45 * gap);
    // Same quarter-radius margin as the interval containment test, so a
    // decomposition that constructs successfully is also valid at y0.
    if (0.75 * out.radius[k] <= 1.05 * spread[k])
      throw ClusteringImpossible(
          "eigenvalue cluster does not fit in a disk of diameter " +
          std::to_string(delta));
  }

  // Grow the validity interval by doubling, then bisect onto the boundary.
  if (detail::interval_inside(field, y0, kPi, out.centers, out.radius)) {
    out.covers_all = true;
    out.half_width = kPi;
  } else {
    double lo = 0.0, hi = kPi / 64.0;
    while (hi < kPi &&
           detail::interval_inside(field, y0, hi, out.centers, out.radius)) {
      lo = hi;
      hi *= 2.0;
    }
    hi = std::min(hi, kPi);
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (detail::interval_inside(field, y0, mid, out.centers, out.radius))
        lo = mid;
      else
        hi = mid;
    }
    out.half_width = lo;
  }

  const int table = 65;
  out.ys.resize(table);
  out.projections.assign(out.centers.size(), std::vector<Mat>(table));
  for (int j = 0; j < table; ++j) {
    const double y =
        y0 - out.half_width + 2.0 * out.half_width * j / (table - 1);
    out.ys[j] = y;
    const Mat ay = field.at(y);
    for (std::size_t k = 0; k < out.centers.size(); ++k)
      out.projections[k][j] = riesz_projection(ay, out.centers[k], out.radius[k]);
  }
  return out;
}

// <eta>_y^{a(y) + s I} by the resolvent contour power.
inline Mat bracket_power_symbol(const EndomorphismField& field,
                                const BracketMetric& metric, double y,
                                double eta, double s, int nodes = 256) {
  const Mat base =
      field.at(y) + s * Mat::Identity(field.rank(), field.rank());
  return matrix_power(base, metric.bracket(y, eta), nodes);
}

struct SymbolEstimateRow {
  int alpha = 0;
  int beta = 0;
  double slope = 0.0;
  double constant = 0.0;
  double bound = 0.0;
  bool pass = false;
  bool fd_stable = true;
};

namespace detail {

// Central difference of matrix samples with one Richardson level; both the
// first- and second-order stencils are O(h^2), so the 4/3 extrapolation
// applies to either. `stable` accumulates the 10%-of-value disagreement test.
template <class G>
Mat richardson_diff(G&& g, double t, double h, int order, bool& stable) {
  const auto stencil = [&](double hh) -> Mat {
    if (order == 1) return Mat((g(t + hh) - g(t - hh)) / (2.0 * hh));
    return Mat((g(t + hh) - 2.0 * g(t) + g(t - hh)) / (hh * hh));
  };
  const Mat d1 = stencil(h);
  const Mat d2 = stencil(0.5 * h);
  const Mat extrap = (4.0 * d2 - d1) / 3.0;
  const double scale = std::max(extrap.norm(), 1e-12);
  if ((d2 - d1).norm() > 0.1 * scale) stable = false;
  return extrap;
}

}  // namespace detail

// Fits the decay of || (D_y^alpha d_eta^beta <eta>^a) <eta>^{-a} || against
// <eta> over the top two sampled decades and compares the slope with
// -beta + delta*alpha plus a fixed regression margin. The (0,0) row fits the
// raw growth of ||<eta>^a|| against the max real part of the spectrum.
inline std::vector<SymbolEstimateRow> symbol_estimate_check(
    const EndomorphismField& field, const BracketMetric& metric, double delta,
    int alpha_max, int beta_max, double y0 = kPi / 2.0, int nodes = 256) {
  if (alpha_max < 0 || alpha_max > 2 || beta_max < 0 || beta_max > 2)
    throw ConfigError("derivative orders supported up to two");

  const AdmissibleDecomposition dec =
      admissible_decomposition(field, y0, delta);
  const double span = 0.8 * dec.half_width;
  std::vector<double> ys;
  for (int j = 0; j < 5; ++j) ys.push_back(y0 - span + 2.0 * span * j / 4.0);

  std::vector<double> etas;
  for (int j = 0; j < 17; ++j) etas.push_back(std::pow(10.0, 4.0 * j / 16.0));

  double max_re = 0.0;
  for (double y : ys)
    for (const cx& l : detail::spectrum_of(field.at(y)))
      max_re = std::max(max_re, l.real());

  // The estimate is gauge-sensitive: differentiating the raw field mixes the
  // spectral blocks and picks up growth at the inter-disk rate, which can
  // exceed delta. Transporting a reference frame of the invariant subspaces
  // with the Riesz projections block-diagonalizes the field across the
  // window, and in that frame the per-disk resolvent bound applies row by
  // row. All derivatives below act on the transported representative.
  const int n = static_cast<int>(field.rank());
  std::vector<Mat> ref;
  int total = 0;
  for (std::size_t l = 0; l < dec.disks(); ++l) {
    const Mat p0 =
        riesz_projection(field.at(y0), dec.centers[l], dec.radius[l], nodes);
    const int r = static_cast<int>(std::lround(p0.trace().real()));
    if (r <= 0) throw ClusteringImpossible("spectral block with empty range");
    Eigen::ColPivHouseholderQR<Mat> qr(p0);
    ref.push_back(Mat(qr.householderQ() * Mat::Identity(n, r)));
    total += r;
  }
  if (total != n)
    throw ClusteringImpossible("spectral blocks do not span the fiber");

  const auto gauged = [&](double y) -> Mat {
    Mat frame(n, n);
    int col = 0;
    for (std::size_t l = 0; l < dec.disks(); ++l) {
      const Mat p =
          riesz_projection(field.at(y), dec.centers[l], dec.radius[l], nodes);
      frame.middleCols(col, ref[l].cols()) = p * ref[l];
      col += static_cast<int>(ref[l].cols());
    }
    Eigen::JacobiSVD<Mat> svd(frame);
    if (!(svd.singularValues()(n - 1) > 1e-8 * svd.singularValues()(0)))
      throw ClusteringImpossible("adapted frame degenerates inside window");
    return frame.partialPivLu().solve(field.at(y) * frame);
  };

  const auto symbol = [&](double y, double eta) {
    return matrix_power(gauged(y), metric.bracket(y, eta), nodes);
  };
  const auto eta_deriv = [&](double y, double eta, int beta,
                             bool& stable) -> Mat {
    if (beta == 0) return symbol(y, eta);
    const double h = 1e-4 * (1.0 + std::abs(eta));
    return detail::richardson_diff([&](double e) { return symbol(y, e); }, eta,
                                   h, beta, stable);
  };

  std::vector<SymbolEstimateRow> rows;
  for (int alpha = 0; alpha <= alpha_max; ++alpha) {
    for (int beta = 0; beta <= beta_max; ++beta) {
      SymbolEstimateRow row;
      row.alpha = alpha;
      row.beta = beta;
      row.bound = (alpha == 0 && beta == 0) ? max_re + 0.1
                                            : -beta + delta * alpha + 0.1;
      std::vector<double> lx, ly;
      for (double eta : etas) {
        double worst = 0.0;
        for (double y : ys) {
          Mat d;
          if (alpha == 0) {
            d = eta_deriv(y, eta, beta, row.fd_stable);
          } else {
            d = detail::richardson_diff(
                [&](double yy) {
                  return eta_deriv(yy, eta, beta, row.fd_stable);
                },
                y, 1e-4, alpha, row.fd_stable);
          }
          double value;
          if (alpha == 0 && beta == 0) {
            value = d.norm();
          } else {
            const Mat t = symbol(y, eta);
            value = Mat(t.transpose()
                            .partialPivLu()
                            .solve(d.transpose())
                            .transpose())
                        .norm();
          }
          worst = std::max(worst, value);
        }
        lx.push_back(std::log(metric.bracket(y0, eta)));
        ly.push_back(worst);
      }

      // Log-log least squares over the top two decades.
      const double top = *std::max_element(lx.begin(), lx.end());
      double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
      int m = 0;
      for (std::size_t j = 0; j < lx.size(); ++j) {
        if (lx[j] < top - 2.0 * std::log(10.0) || ly[j] <= 1e-250) continue;
        const double gx = lx[j], gy = std::log(ly[j]);
        sx += gx;
        sy += gy;
        sxx += gx * gx;
        sxy += gx * gy;
        ++m;
      }
      if (m >= 2) {
        row.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        row.constant = std::exp((sy - row.slope * sx) / m);
      }
      row.pass = row.slope <= row.bound;
      rows.push_back(row);
    }
  }
  return rows;
}

namespace detail {

// Discrete Fourier coefficients on y_j = 2 pi j / n with frequencies placed
// in (-n/2, n/2], matching the trig interpolation convention. Fixed
// summation order keeps the result bit-reproducible.
inline std::vector<Vec> torus_dft(const std::vector<Vec>& u) {
  const int n = static_cast<int>(u.size());
  const int dim = static_cast<int>(u[0].size());
  std::vector<Vec> hat;
  hat.reserve(static_cast<std::size_t>(n));
  for (int eta = -n / 2 + 1; eta <= n / 2; ++eta) {
    Vec acc = Vec::Zero(dim);
    for (int j = 0; j < n; ++j) {
      const double phase = -2.0 * kPi * eta * j / n;
      acc += cx(std::cos(phase), std::sin(phase)) * u[static_cast<std::size_t>(j)];
    }
    hat.push_back(Vec(acc / static_cast<double>(n)));
  }
  return hat;
}

}  // namespace detail

// Variable-order Sobolev norm via Fourier quantization: apply the symbol
// <eta>_y^{a(y)+s} frequency by frequency and take the discrete L^2 norm.
inline double varorder_norm(const std::vector<Vec>& u,
                            const EndomorphismField& field,
                            const BracketMetric& metric, double s,
                            int nodes = 256) {
  const int n = static_cast<int>(u.size());
  if (n < 2 || (n & (n - 1)) != 0)
    throw ConfigError("sample count must be a power of two");
  for (const Vec& v : u)
    if (v.size() != field.rank())
      throw ConfigError("sample rank does not match the field");

  const std::vector<Vec> hat = detail::torus_dft(u);
  double total = 0.0, tail = 0.0;
  for (std::size_t k = 0; k < hat.size(); ++k) {
    const int eta = -n / 2 + 1 + static_cast<int>(k);
    const double e = hat[k].squaredNorm();
    total += e;
    if (std::abs(eta) > n / 4) tail += e;
  }
  if (tail > 1e-20 * total)
    throw AliasingError("samples carry energy in the top frequency octave");

  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double y = 2.0 * kPi * j / n;
    Vec val = Vec::Zero(field.rank());
    for (std::size_t k = 0; k < hat.size(); ++k) {
      const int eta = -n / 2 + 1 + static_cast<int>(k);
      if (hat[k].squaredNorm() == 0.0) continue;
      const double phase = 2.0 * kPi * eta * j / n;
      val += cx(std::cos(phase), std::sin(phase)) *
             Vec(bracket_power_symbol(field, metric, y, eta, s, nodes) * hat[k]);
    }
    acc += val.squaredNorm();
  }
  return std::sqrt(acc / n);
}

// Max relative defect of p(y, rho eta) = rho^mu rho^{-b(y)} p(y, eta)
// rho^{a(y)} over rho in {2, 4, 8} and the sampled (y, eta).
template <class P>
double twisted_homogeneity_check(P&& p, const EndomorphismField& a,
                                 const EndomorphismField& b, double mu,
                                 const std::vector<double>& ys,
                                 const std::vector<double>& etas,
                                 int nodes = 256) {
  if (ys.empty() || etas.empty()) throw ConfigError("empty sample grid");
  const double lo = *std::min_element(etas.begin(), etas.end());
  const double hi = *std::max_element(etas.begin(), etas.end());
  if (lo < 1.0 - 1e-12 || lo > 1.0 + 1e-12 || hi < 64.0 - 1e-12)
    throw ConfigError("frequency samples must cover [1, 64] starting at 1");

  double worst = 0.0;
  for (double rho : {2.0, 4.0, 8.0}) {
    const double lmu = std::pow(rho, mu);
    for (double y : ys) {
      const Mat ga = matrix_power(a.at(y), rho, nodes);
      const Mat gb = matrix_power(Mat(-b.at(y)), rho, nodes);
      for (double eta : etas) {
        const Mat lhs = p(y, rho * eta);
        const Mat rhs = lmu * Mat(gb * p(y, eta) * ga);
        worst = std::max(worst, (lhs - rhs).norm() / lhs.norm());
      }
    }
  }
  return worst;
}

// Sobolev norm of a boundary trace section: order s shifted down by the
// x d/dx endomorphism of the frame, i.e. the field s I - a(y).
inline double trace_sobolev_norm(const std::vector<Vec>& u,
                                 const EndomorphismField& xdx_field,
                                 const BracketMetric& metric, double s,
                                 int nodes = 256) {
  return varorder_norm(u, EndomorphismField(xdx_field.a.scaled(cx(-1.0))),
                       metric, s, nodes);
}

}  // namespace wedgetrace
