// SPDX-License-Identifier: Apache-2.0
#pragma once

// Ground-truth example families. Everything here has a closed form: the
// two-by-two-per-mode line bundle family with spectrum +-i lambda_k sqrt(phi_jj),
// its collision frame at points where the diagonal couplings cross, classical
// operators a(y) p_m(sigma) on the half line, and the disk witness comparing
// the boundary-augmented second-order norm against the full H^2 norm.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "wedgetrace/family.hpp"
#include "wedgetrace/poly.hpp"
#include "wedgetrace/singular.hpp"
#include "wedgetrace/types.hpp"
#include "wedgetrace/wedge.hpp"

namespace wedgetrace {

// ---------------------------------------------------------------------------
// Line bundle example
// ---------------------------------------------------------------------------

struct LineBundleExample {
  TrigPoly phi11, phi12, phi21, phi22;
  std::vector<double> lambda;  // nondecreasing fiber eigenvalues, lambda[0] > 0
  double gamma = 1.0;
  static constexpr int m = 2;

  Strip strip() const { return Strip{gamma, static_cast<double>(m)}; }
  int modes() const { return static_cast<int>(lambda.size()); }

  void validate() const {
    if (lambda.empty() || lambda[0] <= 0.0)
      throw ConfigError("fiber eigenvalue list must start positive");
    if (!std::is_sorted(lambda.begin(), lambda.end()))
      throw ConfigError("fiber eigenvalues must be nondecreasing");
  }

  // The regime in which the strip catches exactly the mode-0 roots:
  // phi21 = 0 and 1/lambda_1^2 < |phi_jj| < 1/lambda_0^2 pointwise.
  bool in_validated_regime() const {
    if (!phi21.is_zero() || lambda.size() < 2) return false;
    const double lo = 1.0 / (lambda[1] * lambda[1]);
    const double hi = 1.0 / (lambda[0] * lambda[0]);
    for (int j = 0; j < 256; ++j) {
      const double y = 2.0 * kPi * j / 256;
      for (const TrigPoly* phi : {&phi11, &phi22}) {
        const double v = std::abs(phi->value(y));
        if (!(lo < v && v < hi)) return false;
      }
    }
    return true;
  }
};

// Block-diagonal family over the retained modes: block k is
// [[sigma^2 + lambda_k^2 phi11, phi12], [phi21, sigma^2 + lambda_k^2 phi22]].
inline MatrixPolyFamily line_bundle_family(const LineBundleExample& ex) {
  ex.validate();
  const int K = ex.modes();
  const int dim = 2 * K;
  TrigMat c0(dim, dim);
  for (int k = 0; k < K; ++k) {
    const cx l2 = ex.lambda[k] * ex.lambda[k];
    c0(2 * k, 2 * k) = l2 * ex.phi11;
    c0(2 * k, 2 * k + 1) = ex.phi12;
    c0(2 * k + 1, 2 * k) = ex.phi21;
    c0(2 * k + 1, 2 * k + 1) = l2 * ex.phi22;
  }
  return MatrixPolyFamily(
      {c0, TrigMat::zero(dim, dim), TrigMat::constant(Mat::Identity(dim, dim))});
}

// Square root continued along y from the principal branch at y=0. Rejects
// inputs whose values approach 0 on the path (the branch would be ambiguous).
inline cx continued_sqrt(const TrigPoly& phi, double y, int steps = 256) {
  double scale = 0.0;
  for (const auto& [n, c] : phi.coefficients()) scale += std::abs(c);
  cx w = std::sqrt(phi.value(0.0));
  for (int i = 0; i <= steps; ++i) {
    const double t = y * i / steps;
    const cx v = phi.value(t);
    if (std::abs(v) < 1e-12 * std::max(scale, 1.0))
      throw BranchAmbiguity("coupling function vanishes along the path to y");
    cx r = std::sqrt(v);
    if (std::abs(r - w) > std::abs(r + w)) r = -r;
    w = r;
  }
  return w;
}

// Strip-filtered closed-form roots {+-i lambda_k sqrt(phi_jj(y))}, sorted by
// (Im, Re) for deterministic output. Requires the triangular case phi21 = 0.
inline std::vector<cx> closed_form_spectrum(const LineBundleExample& ex,
                                            double y) {
  ex.validate();
  if (!ex.phi21.is_zero())
    throw ConfigError("closed-form spectrum needs a triangular family");
  const Strip strip = ex.strip();
  std::vector<cx> roots;
  for (double l : ex.lambda) {
    for (const TrigPoly* phi : {&ex.phi11, &ex.phi22}) {
      const cx w = continued_sqrt(*phi, y);
      for (cx s : {cx(0, 1) * l * w, cx(0, -1) * l * w})
        if (strip.contains(s)) roots.push_back(s);
    }
  }
  std::sort(roots.begin(), roots.end(), [](cx a, cx b) {
    return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
  });
  return roots;
}

// Reference frame data at a collision point y0 where phi11(y0) = phi22(y0).
// Everything refers to the mode-0 block M(sigma, y0) = [[q, phi12],[0, q]]
// with q(sigma) = sigma^2 + lambda_0^2 phi11(y0) and roots sigma_{+-}.
//
// `printed` holds the reference frame in its source normalization:
//   chi_1^pm = 1/(2 sigma_pm (sigma - sigma_pm)) e1,
//   chi_2^pm = (1/(sigma-sigma_pm)^2 - 1/(sigma_pm(sigma-sigma_pm))) e1
//              + 2 sigma_pm/(sigma-sigma_pm) e2.
// `residue` holds the exact principal parts of M^{-1} e1 and M^{-1} e2 at the
// same poles. chi_1 coincides with its residue form; chi_2 is proportional to
// its residue form exactly when phi12 = -1 (the crossing fixture fixes that),
// with per-vector factor 4 sigma_pm^2.
struct CollisionReference {
  cx sigma_plus;
  cx sigma_minus;
  std::vector<SingularPart> printed;  // chi1+, chi1-, chi2+, chi2-
  std::vector<SingularPart> residue;  // same order, residue-exact forms
};

inline CollisionReference collision_frame_reference(const LineBundleExample& ex,
                                                    double y0) {
  ex.validate();
  if (!ex.phi21.is_zero())
    throw ConfigError("collision reference needs a triangular family");
  const cx p11 = ex.phi11.value(y0), p22 = ex.phi22.value(y0);
  if (std::abs(p11 - p22) > 1e-10 * std::max(std::abs(p11), 1.0))
    throw ConfigError("no collision at the requested point");
  const double l0 = ex.lambda[0];
  const cx phi12 = ex.phi12.value(y0);
  const cx sp = cx(0, 1) * l0 * continued_sqrt(ex.phi11, y0);
  const cx sm = -sp;
  Vec e1 = Vec::Zero(2), e2 = Vec::Zero(2);
  e1(0) = 1.0;
  e2(1) = 1.0;

  CollisionReference ref;
  ref.sigma_plus = sp;
  ref.sigma_minus = sm;
  for (cx s0 : {sp, sm}) {
    SingularPart chi1;
    chi1.poles.push_back({s0, {Vec(e1 / (2.0 * s0))}});
    ref.printed.push_back(chi1);
    ref.residue.push_back(chi1);  // identical closed forms
  }
  for (cx s0 : {sp, sm}) {
    SingularPart chi2;
    // order-2 coefficient first entry of coeff is the (sigma-s0)^{-1} slot
    chi2.poles.push_back({s0, {Vec(-e1 / s0 + 2.0 * s0 * e2), Vec(e1)}});
    ref.printed.push_back(chi2);

    SingularPart res;
    const cx a2 = -phi12 / (4.0 * s0 * s0);
    const cx a1 = phi12 / (4.0 * s0 * s0 * s0);
    res.poles.push_back({s0, {Vec(a1 * e1 + e2 / (2.0 * s0)), Vec(a2 * e1)}});
    ref.residue.push_back(res);
  }
  return ref;
}

// ---------------------------------------------------------------------------
// Classical example
// ---------------------------------------------------------------------------

// Polynomial q_k with x^k D_x^k = q_k(xD_x): q_k(s) = prod_{j=0}^{k-1}(s + ij).
inline Poly xdx_power_poly(int k) {
  Poly p = Poly::constant(1.0);
  for (int j = 0; j < k; ++j) p = p * Poly({cx(0, j), cx(1, 0)});
  return p;
}

struct ClassicalTerm {
  int k = 0;      // D_x order
  int alpha = 0;  // D_y order
  int xpow = 0;   // x-power of the coefficient
  TrigMat coeff;  // r x r
};

struct ClassicalExample {
  int m = 1;
  int r = 1;
  TrigMat a;  // top coefficient a_{m0}(0, y), invertible for all y
  std::vector<ClassicalTerm> lower;  // optional lower-order terms
  double gamma = 0.5;

  Strip strip() const { return Strip{gamma, static_cast<double>(m)}; }

  void validate() const {
    if (m < 1 || r < 1) throw ConfigError("classical example needs m, r >= 1");
    if (a.rows() != r || a.cols() != r)
      throw ConfigError("top coefficient has the wrong shape");
    for (int j = 0; j < 64; ++j) {
      const double y = 2.0 * kPi * j / 64;
      if (smallest_singular_value(a.value(y)) < 1e-8)
        throw ConfigError("top coefficient must be invertible for all y");
    }
    for (const auto& t : lower)
      if (t.k + t.alpha > m || t.k < 0 || t.alpha < 0 || t.xpow < 0)
        throw ConfigError("term table entry exceeds the stated order");
  }
};

// Boundary family of the classical operator: a(y) * q_m(sigma). Lower-order
// terms drop out because they carry positive powers of x after rescaling.
inline MatrixPolyFamily classical_family(const ClassicalExample& ex) {
  ex.validate();
  const Poly pm = xdx_power_poly(ex.m);
  std::vector<TrigMat> coeff;
  coeff.reserve(ex.m + 1);
  for (int j = 0; j <= ex.m; ++j) {
    TrigMat cj(ex.r, ex.r);
    const cx w = j <= pm.degree() ? pm.coeffs()[j] : cx(0.0);
    cj += ex.a.scaled(w);
    coeff.push_back(std::move(cj));
  }
  return MatrixPolyFamily(std::move(coeff));
}

// Rewrite sum a_{k,alpha}(x,y) D_x^k D_y^alpha as a wedge operator: multiply
// by x^m and use D_x^k = x^{-k} q_k(xD_x), D_y^alpha = x^{-alpha}(xD_y)^alpha,
// so each classical term lands at x-power m - k - alpha droop across the
// expansion of q_k into plain xD_x powers.
inline WedgeOperatorSpec classical_to_wedge(const ClassicalExample& ex) {
  ex.validate();
  WedgeOperatorSpec spec;
  spec.m = ex.m;
  spec.rank_e = spec.rank_f = ex.r;
  spec.gamma = ex.gamma;
  spec.fiber = FiberBasis::point();
  std::map<std::tuple<int, int>, CoeffTable> table;
  auto add_classical = [&](int k, int alpha, int xpow, const TrigMat& c) {
    const Poly qk = xdx_power_poly(k);
    for (int j = 0; j <= qk.degree(); ++j) {
      const cx w = qk.coeffs()[j];
      if (w == cx(0.0)) continue;
      table[{j, alpha}].add(xpow + ex.m - k - alpha, 0, c.scaled(w));
    }
  };
  add_classical(ex.m, 0, 0, ex.a);
  for (const auto& t : ex.lower) add_classical(t.k, t.alpha, t.xpow, t.coeff);
  for (auto& [key, coeff] : table) {
    WedgeTerm term;
    term.k = std::get<0>(key);
    term.alpha = std::get<1>(key);
    term.beta = 0;
    term.coeff = std::move(coeff);
    spec.terms.push_back(std::move(term));
  }
  return spec;
}

// The line bundle example as a wedge operator table on a circle fiber:
//   (xD_x)^2 I + (xD_y)^2 I + D_z^2 diag(phi11, phi22)
//   + c diag(phi11, phi22) + offdiag(phi12, phi21),
// whose indicial blocks reproduce line_bundle_family with lambda_k^2 = n_k^2+c.
inline WedgeOperatorSpec line_bundle_to_wedge(const LineBundleExample& ex, int K,
                                              double c) {
  WedgeOperatorSpec spec;
  spec.m = 2;
  spec.rank_e = spec.rank_f = 2;
  spec.gamma = ex.gamma;
  spec.fiber = FiberBasis::circle(K, c);
  const Mat I2 = Mat::Identity(2, 2);
  WedgeTerm t200{2, 0, 0, CoeffTable::constant(I2)};
  WedgeTerm t020{0, 2, 0, CoeffTable::constant(I2)};
  TrigMat diag_phi(2, 2);
  diag_phi(0, 0) = ex.phi11;
  diag_phi(1, 1) = ex.phi22;
  WedgeTerm t002{0, 0, 2, CoeffTable::from_trig(diag_phi)};
  TrigMat zero_order(2, 2);
  zero_order(0, 0) = cx(c) * ex.phi11;
  zero_order(1, 1) = cx(c) * ex.phi22;
  zero_order(0, 1) = ex.phi12;
  zero_order(1, 0) = ex.phi21;
  WedgeTerm t000{0, 0, 0, CoeffTable::from_trig(zero_order)};
  spec.terms = {t200, t020, t002, t000};
  return spec;
}

// ---------------------------------------------------------------------------
// Disk witness
// ---------------------------------------------------------------------------

// Finite sums of coeff * z^p zbar^q on the unit disk. All inner products used
// below reduce to the closed form
//   integral over the disk of z^a zbar^b conj(z^c zbar^d) dA
//     = 2 pi / (a+b+c+d+2) if a - b = c - d, else 0.
class DiskPoly {
 public:
  DiskPoly() = default;
  static DiskPoly monomial(cx coeff, int p, int q) {
    DiskPoly u;
    if (coeff != cx(0.0)) u.terms_.push_back({coeff, p, q});
    return u;
  }

  const std::vector<std::tuple<cx, int, int>>& terms() const { return terms_; }

  DiskPoly dz() const {
    DiskPoly u;
    for (const auto& [c, p, q] : terms_)
      if (p > 0) u.terms_.push_back({c * static_cast<double>(p), p - 1, q});
    return u;
  }

  DiskPoly dzbar() const {
    DiskPoly u;
    for (const auto& [c, p, q] : terms_)
      if (q > 0) u.terms_.push_back({c * static_cast<double>(q), p, q - 1});
    return u;
  }

  DiskPoly laplacian() const {
    DiskPoly u = dz().dzbar();
    for (auto& [c, p, q] : u.terms_) c *= 4.0;
    return u;
  }

  // L2(disk) inner product <u, w>, exact.
  static cx inner(const DiskPoly& u, const DiskPoly& w) {
    cx acc(0.0);
    for (const auto& [cu, pu, qu] : u.terms_)
      for (const auto& [cw, pw, qw] : w.terms_)
        if (pu - qu == pw - qw)
          acc += cu * std::conj(cw) * 2.0 * kPi /
                 static_cast<double>(pu + qu + pw + qw + 2);
    return acc;
  }

  // Boundary Fourier coefficient of e^{i n theta} at r = 1.
  cx boundary_coeff(int n) const {
    cx acc(0.0);
    for (const auto& [c, p, q] : terms_)
      if (p - q == n) acc += c;
    return acc;
  }

  // Same for the radial derivative at r = 1: each monomial scales by p + q.
  cx radial_boundary_coeff(int n) const {
    cx acc(0.0);
    for (const auto& [c, p, q] : terms_)
      if (p - q == n) acc += c * static_cast<double>(p + q);
    return acc;
  }

 private:
  std::vector<std::tuple<cx, int, int>> terms_;
};

// ||u||^2 with the boundary-augmented norm: L2 + ||Laplacian u||^2 plus the
// boundary terms |g0|^2 (1+n^2)^{3/2} and |g1|^2 (1+n^2)^{1/2} per frequency.
inline double disk_trace_norm_sq(const DiskPoly& u, int max_freq) {
  double acc = std::real(DiskPoly::inner(u, u));
  const DiskPoly lap = u.laplacian();
  acc += std::real(DiskPoly::inner(lap, lap));
  for (int n = -max_freq; n <= max_freq; ++n) {
    const double w = 1.0 + static_cast<double>(n) * n;
    acc += 2.0 * kPi * std::pow(w, 1.5) * std::norm(u.boundary_coeff(n));
    acc += 2.0 * kPi * std::pow(w, 0.5) * std::norm(u.radial_boundary_coeff(n));
  }
  return acc;
}

// ||u||^2_{H^2} = L2 + 2(|u_z|^2 + |u_zbar|^2) + Hessian, with the Hessian
// written as 4|u_zz|^2 + 8|u_zzbar|^2 + 4|u_zbarzbar|^2.
inline double disk_h2_norm_sq(const DiskPoly& u) {
  auto re = [](cx v) { return std::real(v); };
  double acc = re(DiskPoly::inner(u, u));
  const DiskPoly uz = u.dz(), uzb = u.dzbar();
  acc += 2.0 * re(DiskPoly::inner(uz, uz)) + 2.0 * re(DiskPoly::inner(uzb, uzb));
  const DiskPoly uzz = uz.dz(), uzzb = uz.dzbar(), uzbzb = uzb.dzbar();
  acc += 4.0 * re(DiskPoly::inner(uzz, uzz)) +
         8.0 * re(DiskPoly::inner(uzzb, uzzb)) +
         4.0 * re(DiskPoly::inner(uzbzb, uzbzb));
  return acc;
}

struct DiskWitnessResult {
  double c_min = 0.0;  // smallest Rayleigh ratio trace-norm / H2-norm
  double c_max = 0.0;  // largest
};

// Extreme generalized eigenvalues of the two Gram forms over the basis
// {r^{|n|} e^{i n theta}, r^{|n|+2} e^{i n theta} : |n| <= N}. Frequencies
// decouple, so the problem splits into 2x2 blocks (identical for +-n).
inline DiskWitnessResult disk_norm_witness(int N) {
  if (N < 2) throw ConfigError("disk witness needs at least two frequencies");
  DiskWitnessResult out;
  out.c_min = std::numeric_limits<double>::infinity();
  out.c_max = 0.0;
  for (int n = 0; n <= N; ++n) {
    const DiskPoly b1 = DiskPoly::monomial(1.0, n, 0);
    const DiskPoly b2 = DiskPoly::monomial(1.0, n + 1, 1);
    // Unit-H2 scaling keeps the 2x2 Gram blocks well conditioned.
    const double s1 = 1.0 / std::sqrt(disk_h2_norm_sq(b1));
    const double s2 = 1.0 / std::sqrt(disk_h2_norm_sq(b2));
    auto scaled = [](const DiskPoly& b, double s) {
      const auto& [c, p, q] = b.terms()[0];
      return DiskPoly::monomial(c * s, p, q);
    };
    const DiskPoly u1 = scaled(b1, s1), u2 = scaled(b2, s2);
    auto afun = [&](const DiskPoly& u, const DiskPoly& w) {
      // polarization of the trace norm via its constituent inner products
      cx acc = DiskPoly::inner(u, w);
      acc += DiskPoly::inner(u.laplacian(), w.laplacian());
      for (int f = -(n + 1); f <= n + 1; ++f) {
        const double wt = 1.0 + static_cast<double>(f) * f;
        acc += 2.0 * kPi * std::pow(wt, 1.5) * u.boundary_coeff(f) *
               std::conj(w.boundary_coeff(f));
        acc += 2.0 * kPi * std::pow(wt, 0.5) * u.radial_boundary_coeff(f) *
               std::conj(w.radial_boundary_coeff(f));
      }
      return acc;
    };
    auto bfun = [&](const DiskPoly& u, const DiskPoly& w) {
      cx acc = DiskPoly::inner(u, w);
      acc += 2.0 * DiskPoly::inner(u.dz(), w.dz()) +
             2.0 * DiskPoly::inner(u.dzbar(), w.dzbar());
      acc += 4.0 * DiskPoly::inner(u.dz().dz(), w.dz().dz()) +
             8.0 * DiskPoly::inner(u.dz().dzbar(), w.dz().dzbar()) +
             4.0 * DiskPoly::inner(u.dzbar().dzbar(), w.dzbar().dzbar());
      return acc;
    };
    Eigen::Matrix2cd A, B;
    A << afun(u1, u1), afun(u2, u1), afun(u1, u2), afun(u2, u2);
    B << bfun(u1, u1), bfun(u2, u1), bfun(u1, u2), bfun(u2, u2);
    if (condition_number(B) > 1e12)
      throw GramConditioning("basis Gram block is numerically singular");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2cd> es(A, B);
    out.c_min = std::min(out.c_min, es.eigenvalues().minCoeff());
    out.c_max = std::max(out.c_max, es.eigenvalues().maxCoeff());
  }
  return out;
}

// Graph-norm comparison along harmonics: ||z^n||_{H^2} / ||z^n||_{graph} with
// graph norm L2 + ||Laplacian||. The closed form of the squared ratio is
// 1 + 2n(n+1) + 4n^2(n-1)(n+1), growing like 4n^4.
inline double disk_graph_ratio(int n) {
  const DiskPoly u = DiskPoly::monomial(1.0, n, 0);
  const DiskPoly lap = u.laplacian();
  const double graph = std::real(DiskPoly::inner(u, u)) +
                       std::real(DiskPoly::inner(lap, lap));
  return std::sqrt(disk_h2_norm_sq(u) / graph);
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

inline LineBundleExample fixture_linebundle_generic() {
  LineBundleExample ex;
  ex.phi11 = TrigPoly::affine_sin(0.49, 0.05);
  ex.phi12 = TrigPoly::constant(-1.0);
  ex.phi21 = TrigPoly();
  ex.phi22 = TrigPoly::constant(0.81);
  ex.lambda = {1.0, 2.0};
  ex.gamma = 1.0;
  return ex;
}

inline LineBundleExample fixture_linebundle_crossing() {
  LineBundleExample ex;
  ex.phi11 = TrigPoly::affine_sin(0.5, 0.2);
  ex.phi12 = TrigPoly::constant(-1.0);
  ex.phi21 = TrigPoly();
  ex.phi22 = TrigPoly::affine_sin(0.5, -0.2);
  ex.lambda = {1.0, 2.0};
  ex.gamma = 1.0;
  return ex;
}

// Constant-coefficient variant used when a y-independent quartic is needed.
inline LineBundleExample fixture_linebundle_constant() {
  LineBundleExample ex = fixture_linebundle_generic();
  ex.phi11 = TrigPoly::constant(0.49);
  return ex;
}

inline ClassicalExample fixture_classical(int m, bool variable = false) {
  ClassicalExample ex;
  ex.m = m;
  ex.r = 1;
  ex.a = TrigMat(1, 1);
  ex.a(0, 0) = variable ? TrigPoly::affine_sin(2.0, 1.0) : TrigPoly::constant(1.0);
  ex.gamma = 0.5;
  return ex;
}

inline std::vector<std::string> fixture_names() {
  return {"classical-m1", "classical-m2", "linebundle-generic",
          "linebundle-crossing", "disk-witness"};
}

}  // namespace wedgetrace
