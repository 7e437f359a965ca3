// SPDX-License-Identifier: Apache-2.0
#pragma once

// Principal parts of meromorphic vector-valued functions and the trace
// elements they correspond to under the inverse Mellin map. These two types
// are the data interchanged between the spectral solvers, the singular-part
// extraction and the pairing.

#include <vector>

#include "wedgetrace/linalg.hpp"

namespace wedgetrace {

// Principal part at one pole: sum_{l=1}^{mu} c_l (sigma - sigma_p)^{-l},
// coeff[l-1] = c_l, c_mu != 0.
struct PolePart {
  cx sigma;
  std::vector<Vec> coeff;

  int order() const { return static_cast<int>(coeff.size()); }
};

// Sum of principal parts over finitely many poles inside a contour.
struct SingularPart {
  std::vector<PolePart> poles;

  int dim() const { return poles.empty() ? 0 : static_cast<int>(poles[0].coeff[0].size()); }

  Vec value(cx sigma) const {
    if (poles.empty()) return Vec();
    Vec acc = Vec::Zero(dim());
    for (const auto& p : poles) {
      const cx d = sigma - p.sigma;
      cx pw = 1.0;
      for (int l = 1; l <= p.order(); ++l) {
        pw /= d;
        acc += pw * p.coeff[l - 1];
      }
    }
    return acc;
  }

  double max_coeff_norm() const {
    double m = 0.0;
    for (const auto& p : poles)
      for (const auto& c : p.coeff) m = std::max(m, c.cwiseAbs().maxCoeff());
    return m;
  }
};

// One term tau x^{i sigma} log^ell x of a trace element.
struct TraceTerm {
  cx sigma;
  int ell = 0;
  Vec coeff;
};

// Finite combination tau(x) = sum_t tau_t x^{i sigma_t} log^{ell_t} x with
// vector coefficients; the realization of boundary asymptotics the pairing
// and the norms consume.
struct TraceElement {
  std::vector<TraceTerm> terms;

  int dim() const { return terms.empty() ? 0 : static_cast<int>(terms[0].coeff.size()); }

  bool empty(double tol = 0.0) const {
    for (const auto& t : terms)
      if (t.coeff.norm() > tol) return false;
    return true;
  }

  // Merge-aware accumulation; sigma values within tol collapse to one term.
  void add_term(cx sigma, int ell, const Vec& coeff, double tol = 1e-12) {
    for (auto& t : terms) {
      if (t.ell == ell && std::abs(t.sigma - sigma) <= tol) {
        t.coeff += coeff;
        return;
      }
    }
    terms.push_back({sigma, ell, coeff});
  }

  Vec value(double x) const {
    if (terms.empty()) return Vec();
    Vec acc = Vec::Zero(dim());
    const double lx = std::log(x);
    for (const auto& t : terms) {
      const cx xis = std::exp(cx(0, 1) * t.sigma * lx);  // x^{i sigma}
      acc += xis * std::pow(lx, t.ell) * t.coeff;
    }
    return acc;
  }

  TraceElement scaled(cx s) const {
    TraceElement out = *this;
    for (auto& t : out.terms) t.coeff *= s;
    return out;
  }

  TraceElement plus(const TraceElement& o, double tol = 1e-12) const {
    TraceElement out = *this;
    for (const auto& t : o.terms) out.add_term(t.sigma, t.ell, t.coeff, tol);
    return out;
  }

  // Drop terms whose coefficients are below tol relative to the largest.
  void prune(double rel_tol = 1e-13) {
    double scale = 0.0;
    for (const auto& t : terms) scale = std::max(scale, t.coeff.norm());
    std::vector<TraceTerm> kept;
    for (auto& t : terms)
      if (t.coeff.norm() > rel_tol * scale) kept.push_back(std::move(t));
    terms = std::move(kept);
  }

  double coeff_norm() const {
    double s = 0.0;
    for (const auto& t : terms) s += t.coeff.squaredNorm();
    return std::sqrt(s);
  }
};

// Canonical key set of (sigma, ell) slots across a collection of elements,
// with sigma values clustered at tolerance. Flattening against this key set
// turns elements into plain vectors for rank and normalization work.
struct TermKeys {
  std::vector<std::pair<cx, int>> keys;
  double tol = 1e-9;

  static TermKeys collect(const std::vector<TraceElement>& elems,
                          double tol = 1e-9) {
    TermKeys k;
    k.tol = tol;
    for (const auto& e : elems)
      for (const auto& t : e.terms) k.index_of(t.sigma, t.ell, true);
    return k;
  }

  std::size_t size() const { return keys.size(); }

  int index_of(cx sigma, int ell, bool insert = false) {
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (keys[i].second == ell && std::abs(keys[i].first - sigma) <= tol)
        return static_cast<int>(i);
    if (!insert) return -1;
    keys.emplace_back(sigma, ell);
    return static_cast<int>(keys.size()) - 1;
  }

  Vec flatten(const TraceElement& e, int dim) {
    Vec v = Vec::Zero(static_cast<Eigen::Index>(keys.size()) * dim);
    for (const auto& t : e.terms) {
      const int i = index_of(t.sigma, t.ell, false);
      if (i < 0) throw Error("trace element has a term outside the key set");
      v.segment(static_cast<Eigen::Index>(i) * dim, dim) += t.coeff;
    }
    return v;
  }
};

// The shared normalization: unit flattened coefficient norm with the largest
// coefficient entry rotated real positive, applied termwise-consistently.
inline TraceElement normalize_trace_element(const TraceElement& e) {
  if (e.terms.empty()) return e;
  const int dim = e.dim();
  std::vector<TraceElement> one{e};
  TermKeys keys = TermKeys::collect(one);
  const Vec flat = keys.flatten(e, dim);
  const Vec unit = normalize_deterministic(flat);
  // unit = phase/scale * flat; recover the scalar from the largest entry.
  Eigen::Index imax = 0;
  flat.cwiseAbs().maxCoeff(&imax);
  const cx factor = unit(imax) / flat(imax);
  return e.scaled(factor);
}

// Same convention for principal parts: stack every pole coefficient, scale to
// unit norm with the largest entry rotated onto the positive real axis.
inline SingularPart normalize_singular_part(const SingularPart& sp) {
  Eigen::Index total = 0;
  for (const auto& p : sp.poles)
    for (const auto& c : p.coeff) total += c.size();
  if (total == 0) return sp;
  Vec flat(total);
  Eigen::Index at = 0;
  for (const auto& p : sp.poles)
    for (const auto& c : p.coeff) {
      flat.segment(at, c.size()) = c;
      at += c.size();
    }
  const Vec unit = normalize_deterministic(flat);
  Eigen::Index imax = 0;
  flat.cwiseAbs().maxCoeff(&imax);
  const cx factor = unit(imax) / flat(imax);
  SingularPart out = sp;
  for (auto& p : out.poles)
    for (auto& c : p.coeff) c *= factor;
  return out;
}

}  // namespace wedgetrace
