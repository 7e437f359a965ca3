// SPDX-License-Identifier: Apache-2.0
#pragma once

// Matrix- and vector-valued polynomials in the Mellin covariable sigma, with
// exact coefficient arithmetic: evaluation, differentiation, Taylor recentering
// and products. These carry the per-y slices of indicial families and the
// entire right-hand sides fed to the singular-part extraction.

#include <Eigen/Dense>
#include <vector>

#include "wedgetrace/linalg.hpp"

namespace wedgetrace {

class PolyMat {
 public:
  PolyMat() = default;
  explicit PolyMat(std::vector<Mat> coeff) : coeff_(std::move(coeff)) { trim(); }

  static PolyMat constant(const Mat& c) { return PolyMat({c}); }

  int degree() const { return static_cast<int>(coeff_.size()) - 1; }
  int rows() const { return coeff_.empty() ? 0 : static_cast<int>(coeff_[0].rows()); }
  int cols() const { return coeff_.empty() ? 0 : static_cast<int>(coeff_[0].cols()); }
  bool is_zero() const { return coeff_.empty(); }

  const Mat& coeff(int j) const { return coeff_[j]; }
  const std::vector<Mat>& coeffs() const { return coeff_; }

  Mat eval(cx sigma) const {
    if (coeff_.empty()) return Mat();
    Mat acc = coeff_.back();
    for (int j = static_cast<int>(coeff_.size()) - 2; j >= 0; --j)
      acc = sigma * acc + coeff_[j];
    return acc;
  }

  // d/dsigma
  PolyMat derivative() const {
    std::vector<Mat> d;
    for (std::size_t j = 1; j < coeff_.size(); ++j)
      d.push_back(static_cast<double>(j) * coeff_[j]);
    return PolyMat(std::move(d));
  }

  // j-th derivative divided by j! evaluated at sigma0 (Taylor coefficient).
  Mat taylor_coeff(cx sigma0, int j) const {
    PolyMat p = recenter(sigma0);
    if (j > p.degree()) return Mat::Zero(rows(), cols());
    return p.coeff_[j];
  }

  // Rewrite as a polynomial in (sigma - sigma0).
  PolyMat recenter(cx sigma0) const {
    std::vector<Mat> out = coeff_;
    // Synthetic division applied repeatedly: out[j] becomes the coefficient of
    // (sigma-sigma0)^j.
    const int d = degree();
    for (int i = 0; i <= d; ++i)
      for (int j = d - 1; j >= i; --j) out[j] += sigma0 * out[j + 1];
    return PolyMat(std::move(out));
  }

  PolyMat operator*(const PolyMat& o) const {
    if (coeff_.empty() || o.coeff_.empty()) return PolyMat();
    std::vector<Mat> out(coeff_.size() + o.coeff_.size() - 1,
                         Mat::Zero(rows(), o.cols()));
    for (std::size_t i = 0; i < coeff_.size(); ++i)
      for (std::size_t j = 0; j < o.coeff_.size(); ++j)
        out[i + j] += coeff_[i] * o.coeff_[j];
    return PolyMat(std::move(out));
  }

  PolyMat operator+(const PolyMat& o) const {
    std::vector<Mat> out(std::max(coeff_.size(), o.coeff_.size()));
    const int r = rows() ? rows() : o.rows();
    const int c = cols() ? cols() : o.cols();
    for (std::size_t j = 0; j < out.size(); ++j) {
      out[j] = Mat::Zero(r, c);
      if (j < coeff_.size()) out[j] += coeff_[j];
      if (j < o.coeff_.size()) out[j] += o.coeff_[j];
    }
    return PolyMat(std::move(out));
  }

  PolyMat scaled(cx s) const {
    std::vector<Mat> out = coeff_;
    for (auto& m : out) m *= s;
    return PolyMat(std::move(out));
  }

  double max_coeff_norm() const {
    double m = 0.0;
    for (const auto& c : coeff_) m = std::max(m, c.cwiseAbs().maxCoeff());
    return m;
  }

 private:
  void trim() {
    while (!coeff_.empty() && coeff_.back().cwiseAbs().maxCoeff() == 0.0)
      coeff_.pop_back();
  }

  std::vector<Mat> coeff_;
};

// Vector polynomial: a PolyMat with a single column, kept as its own alias for
// readability of signatures.
using PolyVec = PolyMat;

inline PolyVec poly_vec(std::vector<Vec> coeff) {
  std::vector<Mat> m;
  m.reserve(coeff.size());
  for (auto& v : coeff) m.push_back(v);
  return PolyVec(std::move(m));
}

// Scalar polynomial in the symbol s of xD_x (used by half-line operators).
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<cx> c) : c_(std::move(c)) { trim(); }
  static Poly constant(cx c) { return Poly({c}); }
  // s - root
  static Poly linear(cx root) { return Poly({-root, cx(1.0)}); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<cx>& coeffs() const { return c_; }

  cx eval(cx s) const {
    cx acc(0.0);
    for (int j = static_cast<int>(c_.size()) - 1; j >= 0; --j)
      acc = acc * s + c_[j];
    return acc;
  }

  Poly operator*(const Poly& o) const {
    if (c_.empty() || o.c_.empty()) return Poly();
    std::vector<cx> out(c_.size() + o.c_.size() - 1, cx(0.0));
    for (std::size_t i = 0; i < c_.size(); ++i)
      for (std::size_t j = 0; j < o.c_.size(); ++j) out[i + j] += c_[i] * o.c_[j];
    return Poly(std::move(out));
  }

  Poly operator+(const Poly& o) const {
    std::vector<cx> out(std::max(c_.size(), o.c_.size()), cx(0.0));
    for (std::size_t j = 0; j < c_.size(); ++j) out[j] += c_[j];
    for (std::size_t j = 0; j < o.c_.size(); ++j) out[j] += o.c_[j];
    return Poly(std::move(out));
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == cx(0.0)) c_.pop_back();
  }
  std::vector<cx> c_;
};

}  // namespace wedgetrace
