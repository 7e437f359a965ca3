// SPDX-License-Identifier: Apache-2.0
#pragma once

// Acceptance battery: eleven oracle- and property-based criteria over the
// shipped fixtures, one result line each. Tolerances and runtime budgets are
// pinned here; the `check` subcommand and the standalone test binary both run
// this suite unchanged. Every criterion is guarded, so one failure cannot
// take down the rest of the battery.

#include <chrono>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "wedgetrace/artifacts.hpp"

namespace wedgetrace {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

namespace checks {

inline std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// First failed expectation wins; an empty message means the criterion passed.
struct Gate {
  std::string fail;
  void require(bool ok, const std::string& msg) {
    if (!ok && fail.empty()) fail = msg;
  }
};

// ---------------------------------------------------------------------------
// 1. line-bundle spectrum against the closed form, both solver routes
// ---------------------------------------------------------------------------

inline std::string check_linebundle_spectrum(int threads) {
  const LineBundleExample ex = fixture_linebundle_generic();
  const MatrixPolyFamily F = line_bundle_family(ex);
  RunConfig cfg;
  cfg.threads = threads;
  const Contour contour = Contour::circle(cx(0.0), 0.95, 512);
  const int grid = 64;

  struct Row {
    double companion = 0.0, contour = 0.0;
    bool count_ok = true;
  };
  const auto rows = parallel_map<Row>(grid, threads, [&](std::size_t j) {
    const double y = 2.0 * kPi * j / grid;
    const std::vector<cx> want = closed_form_spectrum(ex, y);
    Row r;
    const auto match = [&](std::vector<SpectrumPoint> pts, double& worst) {
      std::vector<cx> got;
      for (const auto& p : pts)
        for (int k = 0; k < p.mult; ++k) got.push_back(p.sigma);
      if (got.size() != want.size()) {
        r.count_ok = false;
        return;
      }
      std::sort(got.begin(), got.end(), [](cx a, cx b) {
        return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
      });
      for (std::size_t k = 0; k < got.size(); ++k)
        worst = std::max(worst, std::abs(got[k] - want[k]));
    };
    match(companion_solve(F, y, ex.strip(), cfg), r.companion);
    match(contour_solve(F, y, contour, F.dim(), cfg), r.contour);
    return r;
  });

  Gate g;
  double worst_companion = 0.0, worst_contour = 0.0;
  for (const Row& r : rows) {
    g.require(r.count_ok,
              "a solver found a root count other than the four strip roots");
    worst_companion = std::max(worst_companion, r.companion);
    worst_contour = std::max(worst_contour, r.contour);
  }
  g.require(worst_companion <= 1e-8,
            "companion deviation " + fmt3(worst_companion));
  g.require(worst_contour <= 1e-8, "contour deviation " + fmt3(worst_contour));
  return g.fail;
}

// ---------------------------------------------------------------------------
// 2. classical trace ladder for m = 1, 2, 3
// ---------------------------------------------------------------------------

inline std::string check_classical_traces(int /*threads*/) {
  Gate g;
  for (int m = 1; m <= 3; ++m) {
    const ClassicalExample ex = fixture_classical(m);
    const MatrixPolyFamily F = classical_family(ex);
    const std::string tag = "m=" + std::to_string(m) + ": ";
    for (double y : {0.0, 1.1}) {
      auto pts = companion_solve(F, y, ex.strip());
      g.require(static_cast<int>(pts.size()) == m,
                tag + "expected " + std::to_string(m) + " simple roots");
      if (static_cast<int>(pts.size()) != m) continue;
      std::sort(pts.begin(), pts.end(), [](const SpectrumPoint& a,
                                           const SpectrumPoint& b) {
        return a.sigma.imag() > b.sigma.imag();
      });
      for (int k = 0; k < m; ++k) {
        g.require(std::abs(pts[k].sigma - cx(0.0, -k)) <= 1e-10,
                  tag + "root " + std::to_string(k) + " off the ladder");
        g.require(pts[k].mult == 1, tag + "ladder root not simple");
      }

      const auto basis = trace_fiber_basis(F, y, ex.strip());
      g.require(static_cast<int>(basis.size()) == m,
                tag + "trace fiber dimension is not m");
      std::vector<bool> seen(m, false);
      for (const auto& e : basis) {
        g.require(e.terms.size() == 1 && e.terms[0].ell == 0,
                  tag + "basis element is not a plain power");
        const double k = -e.terms[0].sigma.imag();
        const int ki = static_cast<int>(std::lround(k));
        g.require(ki >= 0 && ki < m && std::abs(k - ki) <= 1e-10 &&
                      std::abs(e.terms[0].sigma.real()) <= 1e-10,
                  tag + "basis exponent escapes the degree window");
        if (ki >= 0 && ki < m) seen[ki] = true;
        g.require(apply_indicial(F, y, e).coeff_norm() <= 1e-12,
                  tag + "indicial action fails to annihilate the basis");
      }
      for (int k = 0; k < m; ++k)
        g.require(seen[k], tag + "power " + std::to_string(k) + " missing");

      const Mat gen = xdx_endomorphism(basis);
      Eigen::ComplexEigenSolver<Mat> eig(gen, false);
      g.require(eig.info() == Eigen::Success, tag + "x d/dx eigensolve failed");
      std::vector<cx> vals(eig.eigenvalues().data(),
                           eig.eigenvalues().data() + m);
      std::sort(vals.begin(), vals.end(),
                [](cx a, cx b) { return a.real() < b.real(); });
      for (int k = 0; k < m; ++k)
        g.require(std::abs(vals[k] - cx(k, 0.0)) <= 1e-10,
                  tag + "x d/dx eigenvalue " + std::to_string(k) + " off");
    }
  }
  return g.fail;
}

// ---------------------------------------------------------------------------
// 3. frame continuation through the eigenvalue crossing
// ---------------------------------------------------------------------------

inline std::string check_collision_frame(int threads) {
  const LineBundleExample ex = fixture_linebundle_crossing();
  const MatrixPolyFamily F = line_bundle_family(ex);
  RunConfig cfg;
  cfg.threads = threads;
  Gate g;

  // The pointwise fiber at the collision carries a logarithm.
  const auto at_collision = trace_fiber_basis(F, 0.0, ex.strip(), cfg);
  bool has_log = false;
  for (const auto& e : at_collision)
    for (const auto& t : e.terms) has_log = has_log || t.ell > 0;
  g.require(has_log, "no log-bearing element at the collision angle");

  const int grid = 64;
  const Contour contour = Contour::circle(cx(0.0), 0.95, 512);
  const TraceFrame one = frame_continuation(F, kPi / 2.0, grid, contour, cfg);
  const TraceFrame two =
      frame_continuation(F, 3.0 * kPi / 2.0, grid, contour, cfg);

  for (int j = 0; j < grid; ++j) {
    const auto& row = one.elements[j];
    TermKeys keys = TermKeys::collect(row);
    Mat B(static_cast<int>(keys.size()) * F.dim(),
          static_cast<int>(row.size()));
    for (std::size_t k = 0; k < row.size(); ++k)
      B.col(static_cast<int>(k)) = keys.flatten(row[k], F.dim());
    if (numeric_rank(B, 1e-8) != static_cast<int>(row.size())) {
      g.require(false, "continued frame loses rank at y index " +
                           std::to_string(j));
      break;
    }
  }

  // Transition between the two continued charts, paired against the
  // pointwise adjoint frame; the adjoint choice cancels in the solve.
  TraceFrame adj;
  adj.y = one.y;
  const MatrixPolyFamily fs = adjoint_family(F, ex.m);
  const auto adj_rows = parallel_map<std::vector<TraceElement>>(
      grid, threads, [&](std::size_t j) {
        return trace_fiber_basis(fs, one.y[j], adjoint_strip(ex.strip()), cfg);
      });
  adj.elements = adj_rows;
  const SmoothnessReport rep = transition_smoothness(
      F, one, two, adj, Cutoff(), LogGrid(0.02, 1.0, 24, 8), cfg);

  std::vector<double> d2(grid), off;
  for (int j = 0; j < grid; ++j) {
    const Mat& prev = rep.field[(j + grid - 1) % grid];
    const Mat& next = rep.field[(j + 1) % grid];
    d2[j] = (next - 2.0 * rep.field[j] + prev).cwiseAbs().maxCoeff();
    const double y = rep.y[j];
    const double dist = std::min({std::abs(y), std::abs(y - kPi),
                                  std::abs(y - 2.0 * kPi)});
    if (dist > 0.5) off.push_back(d2[j]);
  }
  std::sort(off.begin(), off.end());
  const double median = off[off.size() / 2];
  const double peak = *std::max_element(d2.begin(), d2.end());
  g.require(peak <= 10.0 * median,
            "transition second differences spike to " + fmt3(peak) +
                " against median " + fmt3(median));

  // Closed-form reference vectors agree with the residue oracle up to one
  // scalar per vector.
  const CollisionReference ref = collision_frame_reference(ex, 0.0);
  for (std::size_t k = 0; k < ref.printed.size(); ++k) {
    const TraceElement p = to_trace_element(ref.printed[k]);
    const TraceElement r = to_trace_element(ref.residue[k]);
    TermKeys keys = TermKeys::collect({p, r});
    const Vec vp = keys.flatten(p, 2);
    const Vec vr = keys.flatten(r, 2);
    const cx scale = vp.dot(vr) / vp.dot(vp);
    g.require((vr - scale * vp).norm() <= 1e-6 * vr.norm(),
              "reference vector " + std::to_string(k) +
                  " disagrees with the residue oracle");
  }
  return g.fail;
}

// ---------------------------------------------------------------------------
// 4. boundary pairing: conditioning, cutoff independence, adjoint identity
// ---------------------------------------------------------------------------

namespace detail {

// x d/dx on polynomial coefficients.
inline Poly xdx_poly(const Poly& p) {
  std::vector<cx> c = p.coeffs();
  for (std::size_t j = 0; j < c.size(); ++j)
    c[j] *= cx(0.0, -static_cast<double>(j));
  return Poly(std::move(c));
}

// (x - a)^5 (b - x)^5 tail: compact support with C^4 junctions, so repeated
// integration by parts leaves no boundary terms.
inline Poly bump(double a, double b, const Poly& tail) {
  const Poly la = Poly::linear(cx(a));
  const Poly lb({cx(b), cx(-1.0)});
  Poly p = Poly::constant(1.0);
  for (int i = 0; i < 5; ++i) p = p * la * lb;
  return p * tail;
}

// (A phi, psi) - (phi, A* psi) in x^m dx/x by direct quadrature.
inline cx adjoint_defect(const MatrixPolyFamily& F, int m, double y,
                         const Poly& p, const Vec& w, const Poly& q,
                         const Vec& z, const LogGrid& grid) {
  const PolyMat P = F.at_y(y);
  const PolyMat Q = adjoint_family(F, m).at_y(y);
  std::vector<Poly> dp{p}, dq{q};
  for (int k = 1; k <= P.degree(); ++k) dp.push_back(xdx_poly(dp.back()));
  for (int k = 1; k <= Q.degree(); ++k) dq.push_back(xdx_poly(dq.back()));
  cx lhs(0.0), rhs(0.0);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const cx x(grid.points()[j]);
    const double lw = grid.log_weights()[j];
    Vec au = Vec::Zero(P.rows());
    for (int k = 0; k <= P.degree(); ++k)
      au += dp[static_cast<std::size_t>(k)].eval(x) * (P.coeffs()[k] * w);
    Vec av = Vec::Zero(Q.rows());
    for (int k = 0; k <= Q.degree(); ++k)
      av += dq[static_cast<std::size_t>(k)].eval(x) * (Q.coeffs()[k] * z);
    lhs += lw * (q.eval(x) * z).dot(au);
    rhs += lw * av.dot(p.eval(x) * w);
  }
  return lhs - rhs;
}

}  // namespace detail

inline std::string check_pairing(int threads) {
  RunConfig cfg;
  cfg.threads = threads;
  const Cutoff w1(0.25, 0.75), w2(0.4, 0.95);
  const LogGrid grid(0.02, 1.0, 24, 8);
  Gate g;

  for (const std::string name :
       {"classical-m1", "classical-m2", "linebundle-generic",
        "linebundle-crossing"}) {
    const FamilyBundle fb = family_for_fixture(name);
    g.require(check_finite_specb(fb.family, 64, fb.strip, 1e-3, cfg).pass,
              name + ": spectrum touches the strip boundary");
    const MatrixPolyFamily adj = adjoint_family(fb.family, fb.m);
    const Strip adj_strip = adjoint_strip(fb.strip);
    const int grid_n = 16;
    const auto conds =
        parallel_map<double>(grid_n, threads, [&](std::size_t j) {
          const double y = 2.0 * kPi * j / grid_n;
          const auto basis = trace_fiber_basis(fb.family, y, fb.strip, cfg);
          const auto ab = trace_fiber_basis(adj, y, adj_strip, cfg);
          return pairing_matrix(fb.family, y, basis, ab, w1, grid).cond;
        });
    for (double c : conds)
      g.require(c <= 1e6, name + ": pairing condition number " + fmt3(c));
    for (double y : {0.9, 2.5}) {
      const auto basis = trace_fiber_basis(fb.family, y, fb.strip, cfg);
      const auto ab = trace_fiber_basis(adj, y, adj_strip, cfg);
      const double dev =
          cutoff_independence(fb.family, y, basis, ab, w1, w2, grid);
      g.require(dev <= 1e-6, name + ": cutoff swap moves the pairing by " +
                                 fmt3(dev));
    }
  }

  // Scalar first-order hand value [1, 1] = i.
  {
    const FamilyBundle fb = family_for_fixture("classical-m1");
    const auto basis = trace_fiber_basis(fb.family, 0.0, fb.strip);
    const auto adj = trace_fiber_basis(adjoint_family(fb.family, 1), 0.0,
                                       adjoint_strip(fb.strip));
    g.require(basis.size() == 1 && adj.size() == 1,
              "first-order trace fiber is not one-dimensional");
    const cx v = flat_pairing(fb.family, 0.0, basis[0], adj[0], w1,
                              LogGrid(0.05, 1.2, 48, 8));
    g.require(std::abs(v - cx(0.0, 1.0)) <= 1e-8,
              "hand value off by " + fmt3(std::abs(v - cx(0.0, 1.0))));
  }

  // Direct quadrature of the adjoint identity on compactly supported data.
  {
    const LogGrid fine(0.2, 1.5, 64, 8);
    const Poly p = detail::bump(0.2, 1.5, Poly({cx(1.0), cx(0.3)}));
    const Poly q = detail::bump(0.2, 1.5, Poly({cx(1.0), cx(-0.2), cx(0.1)}));
    const cx d1 = detail::adjoint_defect(
        classical_family(fixture_classical(2)), 2, 0.0, p, Vec::Ones(1), q,
        Vec::Ones(1), fine);
    g.require(std::abs(d1) <= 1e-8,
              "classical adjoint defect " + fmt3(std::abs(d1)));
    Vec w(4), z(4);
    w << cx(1.0), cx(0.5, -0.25), cx(-0.75), cx(0.0, 0.3);
    z << cx(0.6, 0.1), cx(-1.0), cx(0.4), cx(0.9, -0.2);
    const cx d2 = detail::adjoint_defect(
        line_bundle_family(fixture_linebundle_generic()),
        LineBundleExample::m, 0.9, p, w, q, z, fine);
    g.require(std::abs(d2) <= 1e-8,
              "line-bundle adjoint defect " + fmt3(std::abs(d2)));
  }
  return g.fail;
}

// ---------------------------------------------------------------------------
// 5. matrix powers
// ---------------------------------------------------------------------------

inline std::string check_matrix_powers(int /*threads*/) {
  Gate g;

  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 0.5;
  d(1, 1) = 1.5;
  Mat want = Mat::Zero(2, 2);
  want(0, 0) = 2.0;
  want(1, 1) = 8.0;
  g.require((matrix_power(d, 4.0) - want).norm() <= 1e-10,
            "diagonal example misses its closed form");

  Mat jordan = Mat::Identity(2, 2);
  jordan(0, 1) = 1.0;
  for (double rho : {0.5, 2.0, 4.0}) {
    Mat closed = rho * Mat::Identity(2, 2);
    closed(0, 1) = rho * std::log(rho);
    g.require((matrix_power(jordan, rho) - closed).norm() <= 1e-10,
              "Jordan block misses its closed form at rho " + fmt3(rho));
  }

  std::mt19937 gen(20260815);
  std::normal_distribution<double> dist(0.0, 1.0);
  const auto random_mat = [&]() {
    Mat a(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = cx(dist(gen), dist(gen));
    return Mat(a * (1.8 / a.operatorNorm()));
  };

  double worst_oracle = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Mat a = random_mat();
    for (double rho : {0.25, 0.7, 1.0, 2.2, 4.0}) {
      const Mat direct = Mat(std::log(rho) * a).exp();
      worst_oracle =
          std::max(worst_oracle, (matrix_power(a, rho) - direct).norm());
    }
  }
  g.require(worst_oracle <= 1e-10,
            "exponential oracle deviation " + fmt3(worst_oracle));

  const double pairs[4][2] = {{0.25, 4.0}, {0.5, 0.5}, {2.0, 2.0}, {1.3, 2.9}};
  double worst_semigroup = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Mat a = random_mat();
    const double r1 = pairs[t % 4][0], r2 = pairs[t % 4][1];
    const Mat defect =
        matrix_power(a, r1) * matrix_power(a, r2) - matrix_power(a, r1 * r2);
    worst_semigroup = std::max(worst_semigroup, defect.norm());
  }
  g.require(worst_semigroup <= 1e-10,
            "semigroup defect " + fmt3(worst_semigroup));
  return g.fail;
}

// ---------------------------------------------------------------------------
// 6. disk decomposition projections
// ---------------------------------------------------------------------------

inline EndomorphismField crossing_endomorphism() {
  TrigMat a(2, 2);
  a(0, 0) = TrigPoly::affine_sin(0.5, 0.2);
  a(0, 1) = TrigPoly::constant(1.0);
  a(1, 1) = TrigPoly::affine_sin(0.5, -0.2);
  return EndomorphismField(a);
}

inline std::string check_projections(int /*threads*/) {
  const EndomorphismField field = crossing_endomorphism();
  const AdmissibleDecomposition dec =
      admissible_decomposition(field, kPi / 2.0, 0.25);
  Gate g;
  g.require(dec.disks() == 2, "crossing spectrum should fill two disks");

  const int n = field.rank();
  double worst = 0.0;
  for (std::size_t j = 0; j < dec.ys.size(); ++j) {
    const Mat a = field.at(dec.ys[j]);
    Mat sum = Mat::Zero(n, n);
    for (std::size_t l = 0; l < dec.disks(); ++l) {
      const Mat& p = dec.projections[l][j];
      worst = std::max(worst, (p * p - p).norm());
      worst = std::max(worst, (p * a - a * p).norm());
      sum += p;
    }
    worst = std::max(worst, (sum - Mat::Identity(n, n)).norm());
  }
  g.require(worst <= 1e-10, "projection identity defect " + fmt3(worst));

  double split = 0.0;
  for (std::size_t j = 0; j < dec.ys.size(); j += 4) {
    const Mat a = field.at(dec.ys[j]);
    for (double rho : {2.0, 4.0}) {
      const Mat full = matrix_power(a, rho);
      Mat sum = Mat::Zero(n, n);
      for (std::size_t l = 0; l < dec.disks(); ++l) {
        const Mat& p = dec.projections[l][j];
        sum += p * full * p;
      }
      split = std::max(split, (sum - full).norm());
    }
  }
  g.require(split <= 1e-10, "power splitting defect " + fmt3(split));
  return g.fail;
}

// ---------------------------------------------------------------------------
// 7. derivative estimates on the crossing field
// ---------------------------------------------------------------------------

inline std::string check_symbol_estimates(int /*threads*/) {
  const auto rows = symbol_estimate_check(crossing_endomorphism(),
                                          BracketMetric(), 0.25, 2, 2);
  Gate g;
  g.require(rows.size() == 9, "expected one estimate row per index pair");
  for (const auto& r : rows) {
    const double bound = -r.beta + 0.25 * r.alpha + 0.1;
    const std::string tag = "(" + std::to_string(r.alpha) + "," +
                            std::to_string(r.beta) + ")";
    g.require(r.slope <= bound, "slope " + fmt3(r.slope) + " exceeds " +
                                    fmt3(bound) + " at " + tag);
    g.require(r.pass, "estimate row " + tag + " reports failure");
    if (r.alpha == 0)
      g.require(r.slope <= -r.beta + 0.1,
                "zero-derivative row " + tag + " misses the flat bound");
  }
  return g.fail;
}

// ---------------------------------------------------------------------------
// 8. variable-order norms against the classical scale
// ---------------------------------------------------------------------------

namespace detail {

template <class F>
std::vector<Vec> torus_samples(int n, F&& f) {
  std::vector<Vec> u;
  u.reserve(n);
  for (int j = 0; j < n; ++j) u.push_back(f(2.0 * kPi * j / n));
  return u;
}

inline double classical_norm(const std::vector<cx>& samples, double s) {
  const int n = static_cast<int>(samples.size());
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    cx hat(0.0);
    for (int j = 0; j < n; ++j) {
      const double ang = -2.0 * kPi * k * j / n;
      hat += samples[j] * cx(std::cos(ang), std::sin(ang));
    }
    hat /= static_cast<double>(n);
    const double eta = k <= n / 2 ? k : k - n;
    total += std::pow(1.0 + eta * eta, s) * std::norm(hat);
  }
  return std::sqrt(total);
}

}  // namespace detail

inline std::string check_varorder_norms(int /*threads*/) {
  const BracketMetric metric;
  Gate g;

  std::mt19937 gen(515151);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<cx> modes[2];
  for (int c = 0; c < 2; ++c)
    for (int k = -3; k <= 3; ++k) modes[c].push_back(cx(dist(gen), dist(gen)));
  const auto component = [&](int c, double y) {
    cx v(0.0);
    for (int k = -3; k <= 3; ++k)
      v += modes[c][k + 3] * cx(std::cos(k * y), std::sin(k * y));
    return v;
  };

  // Constant diagonal order: the norm splits into classical component norms.
  {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 0.3;
    a(1, 1) = 1.2;
    const auto field = EndomorphismField::constant(a);
    const auto u = detail::torus_samples(16, [&](double y) {
      Vec v(2);
      v << component(0, y), component(1, y);
      return v;
    });
    for (double s : {0.0, 0.5, 1.5}) {
      std::vector<cx> flat0, flat1;
      for (const Vec& v : u) {
        flat0.push_back(v(0));
        flat1.push_back(v(1));
      }
      const double direct = std::hypot(detail::classical_norm(flat0, s + 0.3),
                                       detail::classical_norm(flat1, s + 1.2));
      const double got = varorder_norm(u, field, metric, s);
      g.require(std::abs(got - direct) <= 1e-12,
                "diagonal norm off by " + fmt3(std::abs(got - direct)) +
                    " at s " + fmt3(s));
    }
  }

  // Single mode: one bracket power of one coupled matrix.
  {
    Mat a(2, 2);
    a << cx(0.4), cx(0.3, 0.1), cx(0.0), cx(1.1);
    const auto field = EndomorphismField::constant(a);
    Vec v(2);
    v << cx(1.0, 2.0), cx(-0.5, 0.25);
    const int eta0 = 3;
    const auto u = detail::torus_samples(32, [&](double y) {
      return Vec(v * cx(std::cos(eta0 * y), std::sin(eta0 * y)));
    });
    const double s = 0.7;
    const double br = metric.bracket(0.0, eta0);
    const Mat power =
        Mat(std::log(br) * (a + s * Mat::Identity(2, 2))).exp();
    const double direct = (power * v).norm();
    const double got = varorder_norm(u, field, metric, s);
    g.require(std::abs(got - direct) <= 1e-10,
              "single-mode norm off by " + fmt3(std::abs(got - direct)));
  }

  // First-order trace scale: the x d/dx action vanishes and the trace norm
  // is the half-order classical norm.
  {
    const ClassicalExample ex = fixture_classical(1);
    const auto basis = trace_fiber_basis(classical_family(ex), 0.4, ex.strip());
    g.require(basis.size() == 1, "first-order trace fiber is not a line");
    const Mat gen1 = xdx_endomorphism(basis);
    g.require(gen1.norm() <= 1e-12, "first-order x d/dx action is nonzero");
    const auto field = EndomorphismField::constant(gen1);
    const auto u = detail::torus_samples(16, [&](double y) {
      return Vec(Vec::Constant(1, component(0, y)));
    });
    std::vector<cx> flat;
    for (const Vec& v : u) flat.push_back(v(0));
    const double got = trace_sobolev_norm(u, field, metric, 0.5);
    const double direct = detail::classical_norm(flat, 0.5);
    g.require(std::abs(got - direct) <= 1e-12,
              "trace norm off the half-order norm by " +
                  fmt3(std::abs(got - direct)));
  }
  return g.fail;
}

// ---------------------------------------------------------------------------
// 9. normal family identities
// ---------------------------------------------------------------------------

inline std::string check_normal_family(int /*threads*/) {
  Gate g;
  const WedgeOperatorSpec specs[2] = {
      line_bundle_to_wedge(fixture_linebundle_generic(), 2, 1.0),
      classical_to_wedge(fixture_classical(2))};
  for (const WedgeOperatorSpec& spec : specs) {
    for (double y : {0.0, 1.3}) {
      const HalfLineOperator op0 = normal_family(spec, spec.fiber, y, 0.0);
      const MatrixPolyFamily fam = indicial_family(spec, spec.fiber);
      HalfLineOperator ind;
      ind.dim = fam.dim();
      ind.m = spec.m;
      ind.gamma = spec.gamma;
      ind.terms.emplace(0, fam.at_y(y));
      g.require(term_lists_equal(op0, ind,
                                 1e-13 * std::max(1.0, op0.max_term_norm())),
                "zero-frequency normal family differs from the boundary "
                "family");
      for (double eta : {1.0, 0.7}) {
        for (double rho : {2.0, 0.5}) {
          const HalfLineOperator lhs =
              kappa_conjugated(normal_family(spec, spec.fiber, y, eta), rho);
          const HalfLineOperator rhs =
              normal_family(spec, spec.fiber, y, rho * eta);
          g.require(term_lists_equal(lhs, rhs, 0.0),
                    "dilation homogeneity has a nonzero defect");
        }
      }
    }
  }
  return g.fail;
}

// ---------------------------------------------------------------------------
// 10. disk witness
// ---------------------------------------------------------------------------

inline std::string check_disk_witness(int /*threads*/) {
  Gate g;
  const DiskWitnessResult w8 = disk_norm_witness(8);
  const DiskWitnessResult w64 = disk_norm_witness(64);
  const double drift_min = std::abs(w64.c_min - w8.c_min) / w8.c_min;
  const double drift_max = std::abs(w64.c_max - w8.c_max) / w8.c_max;
  g.require(drift_min <= 0.2, "lower Rayleigh end drifts " + fmt3(drift_min));
  g.require(drift_max <= 0.2, "upper Rayleigh end drifts " + fmt3(drift_max));
  g.require(w8.c_min > 0.0, "Rayleigh bracket touches zero");

  for (int n : {4, 8, 16, 32}) {
    const double r = disk_graph_ratio(n);
    const double r2 = disk_graph_ratio(2 * n);
    g.require(r2 >= 1.9 * r, "graph ratio grows sublinearly at mode " +
                                 std::to_string(n));
  }
  return g.fail;
}

// ---------------------------------------------------------------------------
// 11. byte-identical artifacts
// ---------------------------------------------------------------------------

inline std::string check_determinism(int /*threads*/) {
  RunConfig one, four;
  one.threads = 1;
  four.threads = 4;
  Gate g;

  const FamilyBundle generic = family_for_fixture("linebundle-generic");
  const std::string s1 = spectrum_csv(generic, 24, one);
  g.require(s1 == spectrum_csv(generic, 24, one),
            "spectrum csv differs between reruns");
  g.require(s1 == spectrum_csv(generic, 24, four),
            "spectrum csv differs across thread counts");

  const FamilyBundle crossing = family_for_fixture("linebundle-crossing");
  const FrameArtifacts f1 = frame_artifacts(crossing, 12, one);
  const FrameArtifacts f4 = frame_artifacts(crossing, 12, four);
  g.require(f1.frame_json == f4.frame_json,
            "frame json differs across thread counts");
  g.require(f1.xdx_csv == f4.xdx_csv,
            "x d/dx csv differs across thread counts");

  const FamilyBundle classical = family_for_fixture("classical-m2");
  const PairingArtifacts p1 = pairing_artifacts(classical, 8, one);
  const PairingArtifacts p4 = pairing_artifacts(classical, 8, four);
  g.require(p1.pairing_csv == p4.pairing_csv,
            "pairing csv differs across thread counts");
  g.require(p1.smoothness_json == p4.smoothness_json,
            "smoothness json differs across thread counts");

  const EndomorphismField field = crossing_endomorphism();
  const std::string e1 =
      estimate_csv(field, BracketMetric(), 0.25, 1, 1, kPi / 2.0, 256);
  g.require(e1 == estimate_csv(field, BracketMetric(), 0.25, 1, 1, kPi / 2.0,
                               256),
            "estimate csv differs between reruns");

  g.require(fixture_json("disk-witness") == fixture_json("disk-witness"),
            "fixture json differs between reruns");
  return g.fail;
}

}  // namespace checks

// ---------------------------------------------------------------------------
// Suite driver
// ---------------------------------------------------------------------------

inline std::vector<CheckResult> run_acceptance_suite(int threads) {
  struct Entry {
    int id;
    const char* name;
    double budget;  // seconds; 0 = unbudgeted
    std::string (*body)(int);
  };
  const Entry entries[] = {
      {1, "line-bundle spectrum matches the closed form on both routes", 10.0,
       &checks::check_linebundle_spectrum},
      {2, "classical traces realize the polynomial ladder", 2.0,
       &checks::check_classical_traces},
      {3, "continued frame stays full-rank through the crossing", 0.0,
       &checks::check_collision_frame},
      {4, "boundary pairing is nondegenerate, cutoff-free and "
          "adjoint-consistent",
       0.0, &checks::check_pairing},
      {5, "matrix powers match closed forms, the oracle and the semigroup "
          "law",
       0.0, &checks::check_matrix_powers},
      {6, "spectral projections respect the disk decomposition", 0.0,
       &checks::check_projections},
      {7, "derivative estimates hold on the crossing field", 60.0,
       &checks::check_symbol_estimates},
      {8, "variable-order norms reduce to the classical scale", 0.0,
       &checks::check_varorder_norms},
      {9, "normal family freezes to the boundary family and dilates exactly",
       0.0, &checks::check_normal_family},
      {10, "disk witness brackets stay stable while graph ratios grow", 30.0,
       &checks::check_disk_witness},
      {11, "artifacts are byte-identical across reruns and thread counts",
       0.0, &checks::check_determinism},
  };

  std::vector<CheckResult> results;
  for (const Entry& e : entries) {
    CheckResult r;
    r.id = e.id;
    r.name = e.name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r.detail = e.body(threads);
      r.pass = r.detail.empty();
    } catch (const std::exception& ex) {
      r.pass = false;
      r.detail = ex.what();
    }
    r.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    if (r.pass && e.budget > 0.0 && r.seconds > e.budget) {
      r.pass = false;
      r.detail = "exceeded the " + checks::fmt3(e.budget) + "s budget";
    }
    results.push_back(std::move(r));
  }
  return results;
}

// One line per criterion; returns true when everything passed.
inline bool report_suite(const std::vector<CheckResult>& results,
                         std::ostream& out) {
  bool all = true;
  for (const auto& r : results) {
    out << "criterion " << std::setw(2) << r.id << ": "
        << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  (" << std::fixed
        << std::setprecision(2) << r.seconds << "s)";
    if (!r.pass) out << "  [" << r.detail << "]";
    out << "\n";
    all = all && r.pass;
  }
  out << (all ? "acceptance suite: all criteria passed"
              : "acceptance suite: FAILURES present")
      << "\n";
  return all;
}

inline ojson suite_report_json(const std::vector<CheckResult>& results) {
  ojson arr = ojson::array();
  bool all = true;
  for (const auto& r : results) {
    ojson j;
    j["id"] = r.id;
    j["name"] = r.name;
    j["pass"] = r.pass;
    j["seconds"] = r.seconds;
    if (!r.pass) j["detail"] = r.detail;
    arr.push_back(std::move(j));
    all = all && r.pass;
  }
  ojson root;
  root["suite"] = "paper";
  root["pass"] = all;
  root["criteria"] = std::move(arr);
  return root;
}

}  // namespace wedgetrace
