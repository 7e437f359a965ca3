// SPDX-License-Identifier: Apache-2.0
#pragma once

// Boundary spectrum inside a strip, computed two independent ways: a
// companion-pencil linearization (the reference path) and a moment-based
// contour eigensolver (the path that generalizes beyond polynomial families).
// On top of that: Jordan structure from local rank profiles, spectrum curves
// over the parameter circle with collision markers, and the admissibility
// check that no spectrum sits on the strip boundary lines.

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "wedgetrace/family.hpp"
#include "wedgetrace/parallel.hpp"
#include "wedgetrace/poly.hpp"
#include "wedgetrace/quadrature.hpp"
#include "wedgetrace/types.hpp"

namespace wedgetrace {

struct SpectrumPoint {
  cx sigma;
  double y = 0.0;
  int mult = 1;
  std::vector<int> partials;     // Jordan partial multiplicities, descending
  bool partials_resolved = true; // false means "some chain has length >= 4"
  double residual = 0.0;         // ||F(y, sigma) v|| for the unit eigenvector
  Vec eigenvector;
  std::string method;            // "companion" or "contour"
};

namespace detail {

// Deterministic (Im, Re)-lexicographic order used everywhere spectra are
// listed, so output never depends on solver internals or thread count.
inline bool sigma_less(cx a, cx b) {
  if (a.imag() != b.imag()) return a.imag() < b.imag();
  return a.real() < b.real();
}

struct Cluster {
  cx center;
  int size = 0;
};

// Greedy union of values within match_tol * max(1, |value|). Input order is
// normalized first, so the result is independent of solver ordering.
inline std::vector<Cluster> cluster_values(std::vector<cx> vals, double match_tol) {
  std::sort(vals.begin(), vals.end(), sigma_less);
  std::vector<Cluster> out;
  for (cx v : vals) {
    bool merged = false;
    for (auto& c : out) {
      const double tol = match_tol * std::max(1.0, std::abs(c.center));
      if (std::abs(v - c.center) <= tol) {
        c.center = (c.center * static_cast<double>(c.size) + v) /
                   static_cast<double>(c.size + 1);
        ++c.size;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back({v, 1});
  }
  std::sort(out.begin(), out.end(),
            [](const Cluster& a, const Cluster& b) { return sigma_less(a.center, b.center); });
  return out;
}

// Effective degree of a matrix polynomial: highest nonvanishing coefficient.
inline int effective_degree(const PolyMat& p, double tol) {
  for (int j = p.degree(); j >= 0; --j)
    if (p.coeffs()[j].cwiseAbs().maxCoeff() > tol) return j;
  return -1;
}

}  // namespace detail

// All finite eigenvalues of det F(sigma) = 0 via the companion pencil in
// shifted-inverted form: eigenvalues of (A - s0 B)^{-1} B are 1/(sigma - s0),
// which handles a singular leading coefficient uniformly. The shift is picked
// from a fixed candidate list; a family whose pencil is singular for every
// candidate has det F identically zero.
inline std::vector<cx> companion_eigenvalues(const PolyMat& P, double rank_tol = 1e-10) {
  const int n = P.rows();
  if (n == 0) throw DegenerateFamily("empty family");
  double scale = 0.0;
  for (const auto& c : P.coeffs()) scale = std::max(scale, c.cwiseAbs().maxCoeff());
  if (scale == 0.0) throw DegenerateFamily("all coefficients vanish");
  const int d = detail::effective_degree(P, 0.0);
  if (d <= 0) return {};  // constant invertible family: nothing inside C

  const int N = n * d;
  Mat A = Mat::Zero(N, N), B = Mat::Zero(N, N);
  for (int j = 0; j + 1 < d; ++j)
    A.block(j * n, (j + 1) * n, n, n) = Mat::Identity(n, n);
  for (int j = 0; j < d; ++j) {
    A.block((d - 1) * n, j * n, n, n) = -P.coeffs()[j] / scale;
    if (j + 1 < d) B.block(j * n, j * n, n, n) = Mat::Identity(n, n);
  }
  B.block((d - 1) * n, (d - 1) * n, n, n) = P.coeffs()[d] / scale;

  const cx shifts[] = {cx(0.37, 0.29),  cx(-0.61, 0.47), cx(1.23, -0.83),
                       cx(-2.17, -1.39), cx(3.01, 2.11)};
  for (cx s0 : shifts) {
    const Mat G = A - s0 * B;
    Eigen::JacobiSVD<Mat> svd(G);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double smax = svd.singularValues()(0);
    if (smin <= 1e-8 * std::max(smax, 1.0)) continue;
    const Mat M = G.partialPivLu().solve(B);
    Eigen::ComplexEigenSolver<Mat> es(M);
    if (es.info() != Eigen::Success) continue;
    std::vector<cx> out;
    for (int j = 0; j < N; ++j) {
      const cx mu = es.eigenvalues()(j);
      if (std::abs(mu) < 1e-12) continue;  // eigenvalue at infinity
      const cx sigma = s0 + 1.0 / mu;
      if (std::abs(sigma) < 1e10) out.push_back(sigma);
    }
    std::sort(out.begin(), out.end(), detail::sigma_less);
    return out;
  }
  (void)rank_tol;
  throw DegenerateFamily("pencil is singular for every probe shift");
}

// Jordan partial multiplicities of sigma0 from kernel growth of the local
// Taylor-Toeplitz matrices T_k = lower-triangular blocks of F, F', F''/2, ...
// dim ker T_k = sum_j min(m_j, k), so the increments count chains of length
// >= k. Chains longer than 3 are reported unresolved.
struct JordanData {
  int geometric = 0;
  std::vector<int> partials;
  bool resolved = true;
};

inline JordanData jordan_structure(const PolyMat& P, cx sigma0, int alg_mult,
                                   double rank_tol) {
  const int n = P.rows();
  double scale = 0.0;
  for (const auto& c : P.coeffs()) scale = std::max(scale, c.cwiseAbs().maxCoeff());
  std::vector<Mat> taylor;
  for (int j = 0; j <= 3; ++j) taylor.push_back(P.taylor_coeff(sigma0, j));

  std::vector<int> kerdim{0};
  for (int k = 1; k <= 3; ++k) {
    Mat T = Mat::Zero(k * n, k * n);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c <= r; ++c) T.block(r * n, c * n, n, n) = taylor[r - c];
    // Absolute threshold against the family scale: near sigma0 whole blocks
    // of T are legitimately tiny, so a relative rank test would miss them.
    Eigen::JacobiSVD<Mat> svd(T);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > rank_tol * std::max(scale, 1e-300)) ++rank;
    kerdim.push_back(k * n - rank);
  }
  std::vector<int> grow(4, 0);
  for (int k = 1; k <= 3; ++k)
    grow[k] = std::max(0, kerdim[k] - kerdim[k - 1]);
  for (int k = 2; k <= 3; ++k) grow[k] = std::min(grow[k], grow[k - 1]);

  JordanData jd;
  jd.geometric = grow[1];
  for (int j = 1; j <= grow[1]; ++j) {
    int len = 0;
    for (int k = 1; k <= 3; ++k)
      if (grow[k] >= j) len = k;
    jd.partials.push_back(len);
  }
  std::sort(jd.partials.rbegin(), jd.partials.rend());
  const int total = std::accumulate(jd.partials.begin(), jd.partials.end(), 0);
  if (total != alg_mult) {
    jd.resolved = false;  // some chain continues past length 3
    jd.partials.clear();
  }
  return jd;
}

namespace detail {

inline SpectrumPoint make_point(const PolyMat& P, cx sigma, double y, int mult,
                                const char* method, double rank_tol) {
  SpectrumPoint pt;
  pt.sigma = sigma;
  pt.y = y;
  pt.mult = mult;
  pt.method = method;
  const Mat F = P.eval(sigma);
  Eigen::JacobiSVD<Mat> svd(F, Eigen::ComputeThinV);
  pt.eigenvector = normalize_deterministic(svd.matrixV().col(P.cols() - 1));
  pt.residual = (F * pt.eigenvector).norm();
  const JordanData jd = jordan_structure(P, sigma, mult, rank_tol);
  pt.partials = jd.partials;
  pt.partials_resolved = jd.resolved;
  return pt;
}

}  // namespace detail

// Reference solver: all pencil eigenvalues, strip-filtered and clustered.
inline std::vector<SpectrumPoint> companion_solve(const MatrixPolyFamily& F,
                                                  double y, const Strip& strip,
                                                  const RunConfig& cfg = {}) {
  const PolyMat P = F.at_y(y);
  std::vector<cx> raw = companion_eigenvalues(P, cfg.rank_tol);
  raw.erase(std::remove_if(raw.begin(), raw.end(),
                           [&](cx s) { return !strip.contains(s); }),
            raw.end());
  std::vector<SpectrumPoint> out;
  for (const auto& c : detail::cluster_values(std::move(raw), cfg.match_tol))
    out.push_back(detail::make_point(P, c.center, y, c.size, "companion", cfg.rank_tol));
  return out;
}

// Winding-number count of eigenvalues inside the contour (with multiplicity):
// the normalized contour integral of trace(F^{-1} F'). Integer up to
// quadrature error for admissible contours.
inline cx argument_principle_count(const PolyMat& P, const Contour& contour) {
  const PolyMat dP = P.derivative();
  return trapezoid_contour_quadrature(contour, [&](cx s) {
    const Mat F = P.eval(s);
    const Mat G = dP.eval(s);
    return cx(F.partialPivLu().solve(G).trace());
  });
}

// Moment-based contour eigensolver. Builds the Cauchy moments
// A_p = (1/2pii) contour-integral of sigma^p F(sigma)^{-1} V, stacks them into
// block Hankel matrices, and reads the eigenvalues off the compressed pencil.
// The Hankel depth starts at one moment pair and grows until the recovered
// multiplicity count matches the argument-principle winding number.
inline std::vector<SpectrumPoint> contour_solve(const MatrixPolyFamily& F,
                                                double y, const Contour& contour,
                                                int probe_rank,
                                                const RunConfig& cfg = {}) {
  const PolyMat P = F.at_y(y);
  const int n = P.rows();
  if (probe_rank < 1 || probe_rank > n)
    throw ConfigError("probe rank must lie in [1, dim]");
  double scale = 0.0;
  for (const auto& c : P.coeffs()) scale = std::max(scale, c.cwiseAbs().maxCoeff());
  if (scale == 0.0) throw DegenerateFamily("all coefficients vanish");
  require_admissible(contour, [&](cx s) { return P.eval(s); }, scale, cfg.rank_tol);

  const cx count_raw = argument_principle_count(P, contour);
  const long count = std::lround(count_raw.real());
  if (std::abs(count_raw - cx(static_cast<double>(count))) > 1e-6)
    throw RankDeficientProbe("winding count is not close to an integer");
  if (count == 0) return {};

  // Deterministic probe block.
  std::mt19937_64 rng(0x77656467u);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Mat V(n, probe_rank);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < probe_rank; ++j) V(i, j) = cx(unif(rng), unif(rng));

  const int nodes = contour.nodes();
  std::vector<Mat> moments(6, Mat::Zero(n, probe_rank));
  for (int j = 0; j < nodes; ++j) {
    const double t = static_cast<double>(j) / nodes;
    const cx s = contour.point(t);
    const cx w = contour.tangent(t) / (cx(0.0, 2.0 * kPi) * static_cast<double>(nodes));
    const Mat X = P.eval(s).partialPivLu().solve(V);
    if (!X.allFinite()) throw NodeOnSingularity("family is singular at a quadrature node");
    cx sp(1.0);
    for (size_t p = 0; p < moments.size(); ++p) {
      moments[p] += (w * sp) * X;
      sp *= s;
    }
  }

  for (int K = 1; K <= 3; ++K) {
    Mat H0(K * n, K * probe_rank), H1(K * n, K * probe_rank);
    for (int r = 0; r < K; ++r)
      for (int c = 0; c < K; ++c) {
        H0.block(r * n, c * probe_rank, n, probe_rank) = moments[r + c];
        H1.block(r * n, c * probe_rank, n, probe_rank) = moments[r + c + 1];
      }
    Eigen::JacobiSVD<Mat> svd(H0, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    if (smax < 1e-13) continue;  // no mass captured at this depth
    int rank = 0;
    bool ambiguous = false;
    for (int i = 0; i < sv.size(); ++i) {
      const double rel = sv(i) / smax;
      if (rel > cfg.rank_tol) ++rank;
      if (rel > cfg.rank_tol / 20.0 && rel < cfg.rank_tol * 20.0) ambiguous = true;
    }
    if (ambiguous) throw RankDeficientProbe("singular values straddle rank_tol");
    if (rank != count && K < 3) continue;  // deepen the Hankel stack
    if (rank != count)
      throw RankDeficientProbe("moment rank never reached the winding count");

    const Mat U = svd.matrixU().leftCols(rank);
    const Mat W = svd.matrixV().leftCols(rank);
    const Vec s_inv = sv.head(rank).cwiseInverse();
    const Mat pencil = U.adjoint() * H1 * W * s_inv.asDiagonal();
    Eigen::ComplexEigenSolver<Mat> es(pencil);
    if (es.info() != Eigen::Success)
      throw RankDeficientProbe("compressed pencil did not converge");
    std::vector<cx> inside;
    for (int j = 0; j < rank; ++j)
      if (contour.encloses(es.eigenvalues()(j))) inside.push_back(es.eigenvalues()(j));
    if (static_cast<long>(inside.size()) != count && K < 3) continue;

    std::vector<SpectrumPoint> out;
    for (const auto& c : detail::cluster_values(std::move(inside), cfg.match_tol))
      out.push_back(detail::make_point(P, c.center, y, c.size, "contour", cfg.rank_tol));
    return out;
  }
  throw RankDeficientProbe("contour moments did not stabilize");
}

// ---------------------------------------------------------------------------
// Curves over the parameter circle
// ---------------------------------------------------------------------------

struct SpectrumCurve {
  int curve_id = 0;
  std::vector<SpectrumPoint> samples;
  std::vector<double> collisions;  // y-values where matching became ambiguous
};

// Track strip spectra over the uniform grid y_j = 2 pi j / grid_n. Per-y
// solves run in parallel; matching is a sequential pass with linear velocity
// prediction, re-seeded after collisions. Multiplicity-carrying points absorb
// one curve per multiplicity unit.
inline std::vector<SpectrumCurve> spectrum_curve(const MatrixPolyFamily& F,
                                                 int grid_n, const Strip& strip,
                                                 const RunConfig& cfg = {}) {
  if (grid_n < 4) throw ConfigError("parameter grid needs at least 4 points");
  const auto per_y = parallel_map<std::vector<SpectrumPoint>>(
      grid_n, cfg.threads, [&](int j) {
        return companion_solve(F, 2.0 * kPi * j / grid_n, strip, cfg);
      });

  struct Track {
    SpectrumCurve curve;
    cx last, prev;
    bool alive = true;
    bool seeded = false;  // true once it has two samples (velocity known)
  };
  std::vector<Track> tracks;
  int next_id = 0;

  for (int j = 0; j < grid_n; ++j) {
    const double yj = 2.0 * kPi * j / grid_n;
    const auto& pts = per_y[j];
    std::vector<int> capacity(pts.size());
    for (size_t p = 0; p < pts.size(); ++p) capacity[p] = pts[p].mult;
    std::vector<std::vector<int>> absorbed(pts.size());

    // Candidate (track, point) pairs within the acceptance radius.
    struct Cand {
      double dist;
      int track, point;
    };
    std::vector<Cand> cands;
    for (size_t t = 0; t < tracks.size(); ++t) {
      if (!tracks[t].alive) continue;
      const cx pred = tracks[t].seeded
                          ? tracks[t].last + (tracks[t].last - tracks[t].prev)
                          : tracks[t].last;
      const double vel = std::abs(tracks[t].last - tracks[t].prev);
      const double radius =
          std::max({5.0 * vel, 0.05 * std::max(1.0, std::abs(tracks[t].last)),
                    10.0 * cfg.match_tol});
      for (size_t p = 0; p < pts.size(); ++p) {
        const double d = std::abs(pts[p].sigma - pred);
        if (d <= radius) cands.push_back({d, static_cast<int>(t), static_cast<int>(p)});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.dist != b.dist) return a.dist < b.dist;
      if (a.track != b.track) return a.track < b.track;
      return a.point < b.point;
    });
    std::vector<bool> matched(tracks.size(), false);
    for (const Cand& c : cands) {
      if (matched[c.track] || capacity[c.point] == 0) continue;
      matched[c.track] = true;
      --capacity[c.point];
      absorbed[c.point].push_back(c.track);
      Track& tr = tracks[c.track];
      tr.curve.samples.push_back(pts[c.point]);
      tr.prev = tr.last;
      tr.last = pts[c.point].sigma;
      tr.seeded = true;
    }
    // Remaining capacity spawns fresh curves (also seeds the first sample).
    for (size_t p = 0; p < pts.size(); ++p)
      for (int c = 0; c < capacity[p]; ++c) {
        Track tr;
        tr.curve.curve_id = next_id++;
        tr.curve.samples.push_back(pts[p]);
        tr.last = tr.prev = pts[p].sigma;
        tracks.push_back(std::move(tr));
        absorbed[p].push_back(static_cast<int>(tracks.size()) - 1);
      }
    for (size_t t = 0; t < matched.size(); ++t)
      if (!matched[t] && tracks[t].alive && !tracks[t].curve.samples.empty() &&
          tracks[t].curve.samples.back().y < yj)
        tracks[t].alive = false;

    // Collision: several curves share one point (multiplicity > 1 absorbed).
    for (size_t p = 0; p < pts.size(); ++p)
      if (absorbed[p].size() > 1)
        for (int t : absorbed[p]) {
          tracks[t].curve.collisions.push_back(yj);
          tracks[t].seeded = false;  // re-seed matching after the collision
          tracks[t].prev = tracks[t].last;
        }
  }

  std::vector<SpectrumCurve> out;
  out.reserve(tracks.size());
  for (auto& t : tracks) out.push_back(std::move(t.curve));
  std::sort(out.begin(), out.end(), [](const SpectrumCurve& a, const SpectrumCurve& b) {
    return a.curve_id < b.curve_id;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Strip-boundary admissibility
// ---------------------------------------------------------------------------

struct FiniteSpecbReport {
  bool pass = true;
  std::vector<SpectrumPoint> offending;
};

// Pass iff no eigenvalue comes within tol of the lines Im sigma = gamma or
// Im sigma = gamma - m at any sampled y. Uses the unfiltered pencil spectrum,
// so points sitting exactly on the strip boundary are seen.
inline FiniteSpecbReport check_finite_specb(const MatrixPolyFamily& F, int grid_n,
                                            const Strip& strip, double tol,
                                            const RunConfig& cfg = {}) {
  if (grid_n < 1) throw ConfigError("need at least one parameter sample");
  const auto per_y = parallel_map<std::vector<cx>>(grid_n, cfg.threads, [&](int j) {
    return companion_eigenvalues(F.at_y(2.0 * kPi * j / grid_n), cfg.rank_tol);
  });
  FiniteSpecbReport rep;
  for (int j = 0; j < grid_n; ++j) {
    const double yj = 2.0 * kPi * j / grid_n;
    for (cx s : per_y[j]) {
      const double d = std::min(std::abs(s.imag() - strip.upper()),
                                std::abs(s.imag() - strip.lower()));
      if (d <= tol) {
        SpectrumPoint pt;
        pt.sigma = s;
        pt.y = yj;
        pt.method = "companion";
        rep.offending.push_back(pt);
        rep.pass = false;
      }
    }
  }
  return rep;
}

}  // namespace wedgetrace
