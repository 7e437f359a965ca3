// SPDX-License-Identifier: Apache-2.0
#pragma once

// A matrix polynomial family F(sigma, y) = sum_j C_j(y) sigma^j on the circle:
// the coefficients are square matrices whose entries are trigonometric
// polynomials in y. This is the common currency between the wedge reduction,
// the spectral solvers and the trace-space machinery.

#include <vector>

#include "wedgetrace/errors.hpp"
#include "wedgetrace/poly.hpp"
#include "wedgetrace/trig.hpp"

namespace wedgetrace {

// Dense matrix of trigonometric polynomials, row-major.
class TrigMat {
 public:
  TrigMat() = default;
  TrigMat(int rows, int cols)
      : rows_(rows), cols_(cols), e_(static_cast<std::size_t>(rows) * cols) {}

  static TrigMat constant(const Mat& m) {
    TrigMat t(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    for (int i = 0; i < t.rows_; ++i)
      for (int j = 0; j < t.cols_; ++j) t(i, j) = TrigPoly::constant(m(i, j));
    return t;
  }

  static TrigMat zero(int rows, int cols) { return TrigMat(rows, cols); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  TrigPoly& operator()(int i, int j) { return e_[idx(i, j)]; }
  const TrigPoly& operator()(int i, int j) const { return e_[idx(i, j)]; }

  Mat value(double y) const {
    Mat m(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) m(i, j) = e_[idx(i, j)].value(y);
    return m;
  }

  // Conjugate transpose as a function of y: entry (i,j) becomes the complex
  // conjugate of entry (j,i), conjugation acting on the trig coefficients so
  // that value(y) of the result equals value(y)^H pointwise.
  TrigMat conjugate_transpose() const {
    TrigMat t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = e_[idx(i, j)].conjugated();
    return t;
  }

  TrigMat derivative() const {
    TrigMat t(rows_, cols_);
    for (std::size_t k = 0; k < e_.size(); ++k) t.e_[k] = e_[k].derivative();
    return t;
  }

  TrigMat& operator+=(const TrigMat& o) {
    for (std::size_t k = 0; k < e_.size(); ++k) e_[k] += o.e_[k];
    return *this;
  }

  TrigMat scaled(cx s) const {
    TrigMat t = *this;
    for (auto& p : t.e_) p = p * TrigPoly::constant(s);
    return t;
  }

  bool is_zero() const {
    for (const auto& p : e_)
      if (!p.is_zero()) return false;
    return true;
  }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * cols_ + j;
  }
  int rows_ = 0, cols_ = 0;
  std::vector<TrigPoly> e_;
};

class MatrixPolyFamily {
 public:
  MatrixPolyFamily() = default;

  // coeff[j] is the matrix coefficient of sigma^j.
  explicit MatrixPolyFamily(std::vector<TrigMat> coeff)
      : coeff_(std::move(coeff)) {
    trim();
  }

  static MatrixPolyFamily from_constant(std::vector<Mat> coeff) {
    std::vector<TrigMat> c;
    c.reserve(coeff.size());
    for (const auto& m : coeff) c.push_back(TrigMat::constant(m));
    return MatrixPolyFamily(std::move(c));
  }

  // Trig interpolation of per-y slices tabulated on the uniform grid
  // y_j = 2 pi j / N. Exact when every entry has trig degree below N/2.
  static MatrixPolyFamily from_y_samples(const std::vector<PolyMat>& slices) {
    if (slices.empty()) throw ConfigError("family interpolation needs samples");
    const int n = static_cast<int>(slices.size());
    int deg = 0, dim = 0;
    for (const auto& p : slices) {
      deg = std::max(deg, p.degree());
      dim = std::max(dim, p.rows());
    }
    std::vector<TrigMat> coeff;
    coeff.reserve(deg + 1);
    std::vector<cx> samples(n);
    for (int j = 0; j <= deg; ++j) {
      TrigMat t(dim, dim);
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
          for (int k = 0; k < n; ++k)
            samples[k] = j <= slices[k].degree() && !slices[k].is_zero()
                             ? slices[k].coeff(j)(r, c)
                             : cx(0.0);
          t(r, c) = TrigPoly::from_samples(samples);
        }
      coeff.push_back(std::move(t));
    }
    return MatrixPolyFamily(std::move(coeff));
  }

  int dim() const { return coeff_.empty() ? 0 : coeff_[0].rows(); }
  int degree() const { return static_cast<int>(coeff_.size()) - 1; }
  const TrigMat& coeff(int j) const { return coeff_[j]; }

  Mat eval(cx sigma, double y) const { return at_y(y).eval(sigma); }

  // Freeze y: returns the ordinary matrix polynomial sigma -> F(sigma, y).
  PolyMat at_y(double y) const {
    std::vector<Mat> c;
    c.reserve(coeff_.size());
    for (const auto& t : coeff_) c.push_back(t.value(y));
    return PolyMat(std::move(c));
  }

  // Adjoint family F*(sigma, y) = [F(conj(sigma), y)]^H. Writing
  // F = sum C_j sigma^j, conjugating sigma and transposing gives
  // F* = sum C_j(y)^H sigma^j: same degree, Hermitian-transposed coefficients.
  MatrixPolyFamily adjoint() const {
    std::vector<TrigMat> c;
    c.reserve(coeff_.size());
    for (const auto& t : coeff_) c.push_back(t.conjugate_transpose());
    return MatrixPolyFamily(std::move(c));
  }

  // Largest coefficient magnitude over a y sample; the scale that tolerances
  // are measured against.
  double coefficient_scale(int y_samples = 32) const {
    double s = 0.0;
    for (int k = 0; k < y_samples; ++k) {
      const double y = 2.0 * kPi * k / y_samples;
      for (const auto& t : coeff_) {
        const Mat m = t.value(y);
        if (m.size()) s = std::max(s, m.cwiseAbs().maxCoeff());
      }
    }
    return s;
  }

  bool constant_in_y() const {
    for (const auto& t : coeff_)
      for (int i = 0; i < t.rows(); ++i)
        for (int j = 0; j < t.cols(); ++j)
          for (const auto& [n, c] : t(i, j).coefficients())
            if (n != 0 && std::abs(c) > 0.0) return false;
    return true;
  }

 private:
  void trim() {
    while (!coeff_.empty() && coeff_.back().is_zero()) coeff_.pop_back();
  }
  std::vector<TrigMat> coeff_;
};

}  // namespace wedgetrace
