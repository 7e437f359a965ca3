// SPDX-License-Identifier: Apache-2.0
#pragma once

// Coordinate-level wedge operators on a collar [0,1) x Y x Z with Y the unit
// circle and Z either a circle or a point:
//
//   A = x^{-m} sum_{k+a+b <= m} a_{kab}(x,y,z) (xD_x)^k (xD_y)^a D_z^b,
//
// D = -i d/d(.). Coefficients are exact tables (polynomial in x, trig in y and
// z), so the boundary reductions below are symbolic identities, not numerics:
// the principal symbol, the indicial family obtained by freezing x=0 and
// substituting xD_x -> sigma, the normal family at a frozen edge covector, and
// the dilation action that makes the normal family homogeneous.

#include <map>
#include <utility>
#include <vector>

#include "wedgetrace/family.hpp"
#include "wedgetrace/poly.hpp"

namespace wedgetrace {

// Truncated eigenbasis of the fiber operator Q_Z = D_z^2 + c. On the circle
// the modes are e^{i n z} ordered 0, +1, -1, +2, -2, ... with lambda_k^2 =
// n_k^2 + c; a point fiber has the single constant mode with lambda^2 = c.
struct FiberBasis {
  enum class Kind { Circle, Point };

  Kind kind = Kind::Point;
  int K = 1;        // number of retained modes
  double c = 0.0;   // zero-mode shift, keeps lambda_0 > 0 when positive

  static FiberBasis point() { return FiberBasis{Kind::Point, 1, 0.0}; }
  static FiberBasis circle(int K, double c) {
    if (K < 1) throw ConfigError("fiber basis needs at least one mode");
    return FiberBasis{Kind::Circle, K, c};
  }

  int frequency(int k) const {
    if (kind == Kind::Point) return 0;
    // 0, +1, -1, +2, -2, ...
    return (k % 2 == 1) ? (k + 1) / 2 : -(k / 2);
  }

  double lambda_sq(int k) const {
    const double n = frequency(k);
    return n * n + c;
  }

  int index_of_frequency(int n) const {
    if (kind == Kind::Point) return n == 0 ? 0 : -1;
    const int k = n > 0 ? 2 * n - 1 : -2 * n;
    return k < K ? k : -1;
  }
};

// Matrix coefficient a(x,y,z) = sum_{p,w} x^p e^{i w z} M_{p,w}(y) stored by
// (x-power, z-frequency); entries of M are trig polynomials in y.
class CoeffTable {
 public:
  CoeffTable() = default;

  static CoeffTable constant(const Mat& m) {
    CoeffTable t;
    t.add(0, 0, TrigMat::constant(m));
    return t;
  }

  static CoeffTable from_trig(const TrigMat& m) {
    CoeffTable t;
    t.add(0, 0, m);
    return t;
  }

  void add(int xpow, int zfreq, const TrigMat& m) {
    if (xpow < 0) throw ConfigError("negative x-power in coefficient table");
    auto key = std::make_pair(xpow, zfreq);
    auto it = terms_.find(key);
    if (it == terms_.end())
      terms_.emplace(key, m);
    else
      it->second += m;
  }

  const std::map<std::pair<int, int>, TrigMat>& terms() const { return terms_; }

  Mat value(double x, double y, double z, int rows, int cols) const {
    Mat acc = Mat::Zero(rows, cols);
    for (const auto& [key, m] : terms_) {
      const auto& [p, w] = key;
      const cx phase = std::polar(1.0, w * z);
      acc += std::pow(x, p) * phase * m.value(y);
    }
    return acc;
  }

  // z-frequency slices of the x=0 part, the only data the boundary reductions
  // see.
  std::map<int, TrigMat> boundary_slices() const {
    std::map<int, TrigMat> out;
    for (const auto& [key, m] : terms_)
      if (key.first == 0) {
        auto it = out.find(key.second);
        if (it == out.end())
          out.emplace(key.second, m);
        else
          it->second += m;
      }
    return out;
  }

 private:
  std::map<std::pair<int, int>, TrigMat> terms_;
};

struct WedgeTerm {
  int k = 0;      // power of xD_x
  int alpha = 0;  // power of xD_y
  int beta = 0;   // power of D_z
  CoeffTable coeff;
};

struct WedgeOperatorSpec {
  int m = 1;
  int rank_e = 1;
  int rank_f = 1;
  double gamma = 0.0;
  FiberBasis fiber = FiberBasis::point();
  std::vector<WedgeTerm> terms;

  void validate() const {
    if (m < 1) throw ConfigError("operator order must be positive");
    if (rank_e < 1 || rank_f < 1) throw ConfigError("bundle ranks must be positive");
    for (const auto& t : terms) {
      if (t.k < 0 || t.alpha < 0 || t.beta < 0)
        throw ConfigError("negative derivative index");
      if (t.k + t.alpha + t.beta > m)
        throw ConfigError("coefficient table has an index beyond the order");
      if (fiber.kind == FiberBasis::Kind::Point && t.beta > 0)
        throw ConfigError("fiber derivatives present but the fiber is a point");
    }
  }
};

// Top-order sum sum_{k+a+b = m} a_{kab}(x,y,z) xi^k eta^a zeta^b.
inline Mat wedge_principal_symbol(const WedgeOperatorSpec& spec, double x,
                                  double y, double z, cx xi, cx eta, cx zeta) {
  Mat acc = Mat::Zero(spec.rank_f, spec.rank_e);
  for (const auto& t : spec.terms) {
    if (t.k + t.alpha + t.beta != spec.m) continue;
    const cx w = std::pow(xi, t.k) * std::pow(eta, t.alpha) * std::pow(zeta, t.beta);
    acc += w * t.coeff.value(x, y, z, spec.rank_f, spec.rank_e);
  }
  return acc;
}

struct EllipticityReport {
  double min_singular = 0.0;
  double x = 0.0, y = 0.0, z = 0.0;         // worst sampled point
  cx xi, eta, zeta;                          // worst unit covector
  bool elliptic(double tol = 1e-6) const { return min_singular > tol; }
};

// Deterministic quasi-uniform sweep of (point, unit covector) pairs; reports
// the smallest principal-symbol singular value seen. Point fibers sample unit
// covectors in the (xi, eta) plane only.
inline EllipticityReport ellipticity_sample_check(const WedgeOperatorSpec& spec,
                                                  int samples) {
  if (samples < 1) throw ConfigError("need at least one ellipticity sample");
  spec.validate();
  auto frac = [](double v) { return v - std::floor(v); };
  EllipticityReport rep;
  rep.min_singular = std::numeric_limits<double>::infinity();
  const bool point_fiber = spec.fiber.kind == FiberBasis::Kind::Point;
  for (int i = 1; i <= samples; ++i) {
    const double x = frac(i * 0.7548776662466927);  // Weyl sequence offsets
    const double y = 2.0 * kPi * frac(i * 0.5698402909980532);
    const double z = point_fiber ? 0.0 : 2.0 * kPi * frac(i * 0.4656613083344186);
    double xi, eta, zeta;
    if (point_fiber) {
      const double phi = 2.0 * kPi * frac(i * 0.3183098861837907);
      xi = std::cos(phi);
      eta = std::sin(phi);
      zeta = 0.0;
    } else {
      const double ct = 2.0 * frac(i * 0.3183098861837907) - 1.0;
      const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      const double phi = 2.0 * kPi * frac(i * 0.2225130940259426);
      xi = st * std::cos(phi);
      eta = st * std::sin(phi);
      zeta = ct;
    }
    const Mat s = wedge_principal_symbol(spec, x, y, z, xi, eta, zeta);
    const double sv = smallest_singular_value(s);
    if (sv < rep.min_singular) {
      rep.min_singular = sv;
      rep.x = x;
      rep.y = y;
      rep.z = z;
      rep.xi = xi;
      rep.eta = eta;
      rep.zeta = zeta;
    }
  }
  return rep;
}

namespace detail {

// Project the multiplication-plus-D_z^beta operator with symbol slices
// {w -> M_w(y)} onto the retained fiber modes: block (j,l) picks up
// M_{n_j - n_l}(y) * n_l^beta. Returns the blocked trig matrix and accumulates
// the norm of components pushed outside the truncation.
inline TrigMat project_fiber(const std::map<int, TrigMat>& slices, int beta,
                             const FiberBasis& fb, int rank_e, int rank_f,
                             double* leakage) {
  const int K = fb.K;
  TrigMat out(K * rank_f, K * rank_e);
  for (const auto& [w, M] : slices) {
    for (int l = 0; l < K; ++l) {
      const int nl = fb.frequency(l);
      if (beta > 0 && nl == 0) continue;
      double weight = 1.0;
      for (int i = 0; i < beta; ++i) weight *= nl;
      const int j = fb.index_of_frequency(nl + w);
      if (j < 0) {
        if (leakage) {
          // Magnitude of the dropped block, sampled over y.
          double mx = 0.0;
          for (int s = 0; s < 16; ++s) {
            const Mat mv = M.value(2.0 * kPi * s / 16.0);
            mx = std::max(mx, mv.cwiseAbs().maxCoeff());
          }
          *leakage += std::abs(weight) * mx;
        }
        continue;
      }
      for (int r = 0; r < rank_f; ++r)
        for (int cidx = 0; cidx < rank_e; ++cidx)
          out(j * rank_f + r, l * rank_e + cidx) +=
              cx(weight) * M(r, cidx);
    }
  }
  return out;
}

}  // namespace detail

// Indicial family: freeze x=0, drop every edge-derivative term (alpha > 0),
// substitute xD_x -> sigma and project the fiber action onto the retained
// modes. Throws TruncationWarning when the fiber coefficients push mass
// outside the truncated span; the overload reports the leakage instead.
inline MatrixPolyFamily indicial_family(const WedgeOperatorSpec& spec,
                                        const FiberBasis& fb,
                                        double& leakage_out) {
  spec.validate();
  if (spec.rank_e != spec.rank_f)
    throw ConfigError("boundary reduction needs equal bundle ranks");
  const int dim = fb.K * spec.rank_e;
  std::vector<TrigMat> coeff(spec.m + 1, TrigMat::zero(dim, dim));
  leakage_out = 0.0;
  for (const auto& t : spec.terms) {
    if (t.alpha != 0) continue;
    const auto slices = t.coeff.boundary_slices();
    if (slices.empty()) continue;
    const TrigMat block = detail::project_fiber(slices, t.beta, fb, spec.rank_e,
                                                spec.rank_f, &leakage_out);
    coeff[t.k] += block;
  }
  return MatrixPolyFamily(std::move(coeff));
}

inline MatrixPolyFamily indicial_family(const WedgeOperatorSpec& spec,
                                        const FiberBasis& fb) {
  double leakage = 0.0;
  MatrixPolyFamily fam = indicial_family(spec, fb, leakage);
  if (leakage > 1e-14 * std::max(1.0, fam.coefficient_scale()))
    throw TruncationWarning(
        "fiber coefficients leak outside the retained modes (norm " +
        std::to_string(leakage) + ")");
  return fam;
}

// Half-line model operator x^{-m} sum_p x^p Q_p(xD_x) with matrix polynomial
// Q_p acting on the truncated fiber. Term lists are canonical (keyed by
// x-power), so symbolic identities between operators are plain equality.
struct HalfLineOperator {
  int dim = 0;
  int m = 1;
  double gamma = 0.0;
  std::map<int, PolyMat> terms;  // x-power -> polynomial in the xD_x symbol

  // The x-power-zero part: the indicial polynomial of this operator.
  PolyMat indicial_part() const {
    auto it = terms.find(0);
    return it == terms.end() ? PolyMat() : it->second;
  }

  double max_term_norm() const {
    double s = 0.0;
    for (const auto& [p, q] : terms) s = std::max(s, q.max_coeff_norm());
    return s;
  }
};

inline bool term_lists_equal(const HalfLineOperator& a, const HalfLineOperator& b,
                             double tol) {
  if (a.dim != b.dim || a.m != b.m) return false;
  auto norm_diff = [&](const PolyMat& p, const PolyMat& q) {
    const int d = std::max(p.degree(), q.degree());
    double s = 0.0;
    for (int j = 0; j <= d; ++j) {
      Mat pj = j <= p.degree() && !p.is_zero() ? p.coeff(j) : Mat::Zero(a.dim, a.dim);
      Mat qj = j <= q.degree() && !q.is_zero() ? q.coeff(j) : Mat::Zero(a.dim, a.dim);
      if (pj.size() == 0) pj = Mat::Zero(a.dim, a.dim);
      if (qj.size() == 0) qj = Mat::Zero(a.dim, a.dim);
      s = std::max(s, (pj - qj).cwiseAbs().maxCoeff());
    }
    return s;
  };
  std::map<int, const PolyMat*> keys;
  for (const auto& [p, q] : a.terms) keys.emplace(p, nullptr);
  for (const auto& [p, q] : b.terms) keys.emplace(p, nullptr);
  const PolyMat zero;
  for (const auto& [p, unused] : keys) {
    const auto ia = a.terms.find(p);
    const auto ib = b.terms.find(p);
    const PolyMat& pa = ia == a.terms.end() ? zero : ia->second;
    const PolyMat& pb = ib == b.terms.end() ? zero : ib->second;
    if (norm_diff(pa, pb) > tol) return false;
  }
  return true;
}

// Normal family at edge point y and frozen edge covector eta:
//   A_wedge(eta) = x^{-m} sum a_{kab}(0,y,z) (xD_x)^k (x eta)^a D_z^b,
// fiber-projected. Each alpha contributes x-power alpha and scalar eta^alpha.
inline HalfLineOperator normal_family(const WedgeOperatorSpec& spec,
                                      const FiberBasis& fb, double y,
                                      double eta) {
  spec.validate();
  if (spec.rank_e != spec.rank_f)
    throw ConfigError("boundary reduction needs equal bundle ranks");
  const int dim = fb.K * spec.rank_e;
  HalfLineOperator op;
  op.dim = dim;
  op.m = spec.m;
  op.gamma = spec.gamma;
  for (const auto& t : spec.terms) {
    const auto slices = t.coeff.boundary_slices();
    if (slices.empty()) continue;
    double leak = 0.0;
    const TrigMat blocked = detail::project_fiber(slices, t.beta, fb, spec.rank_e,
                                                  spec.rank_f, &leak);
    if (t.alpha > 0 && eta == 0.0) continue;  // exact zero weight
    const Mat C = blocked.value(y);
    // Integer power by repeated multiplication keeps dilation tests exact.
    cx w(1.0);
    for (int i = 0; i < t.alpha; ++i) w *= eta;
    std::vector<Mat> q(t.k + 1, Mat::Zero(dim, dim));
    q[t.k] = w * C;
    auto it = op.terms.find(t.alpha);
    if (it == op.terms.end())
      op.terms.emplace(t.alpha, PolyMat(std::move(q)));
    else
      it->second = it->second + PolyMat(std::move(q));
  }
  // Drop exact-zero term slots so term lists are canonical.
  for (auto it = op.terms.begin(); it != op.terms.end();)
    it = it->second.is_zero() ? op.terms.erase(it) : std::next(it);
  return op;
}

// Conjugation by the unitary dilation (scale x by rho, weight rho^gamma),
// multiplied by rho^m: xD_x is dilation invariant and the weight cancels, so
// each x-power-p term just picks up rho^p. On term lists this is exact.
inline HalfLineOperator kappa_conjugated(const HalfLineOperator& op, double rho) {
  if (rho <= 0.0) throw ConfigError("dilation parameter must be positive");
  HalfLineOperator out = op;
  for (auto& [p, q] : out.terms) {
    double f = 1.0;
    for (int i = 0; i < p; ++i) f *= rho;
    q = q.scaled(f);
  }
  return out;
}

}  // namespace wedgetrace
