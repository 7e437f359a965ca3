// SPDX-License-Identifier: Apache-2.0
#pragma once

// Small dense complex linear algebra helpers on top of Eigen: SVD-based rank,
// nullspace, pseudo-inverse, and deterministic normalization of vectors.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "wedgetrace/trig.hpp"

namespace wedgetrace {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline double smallest_singular_value(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues().size() ? svd.singularValues().minCoeff() : 0.0;
}

// Rank with threshold relative to the largest singular value.
inline int numeric_rank(const Mat& a, double rel_tol) {
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0;
  const double cut = rel_tol * s(0);
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++r;
  return r;
}

// Orthonormal basis of the (numerical) kernel, smallest singular directions.
inline Mat nullspace(const Mat& a, double rel_tol) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double cut = rel_tol * (smax > 0.0 ? smax : 1.0);
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++r;
  const int n = static_cast<int>(a.cols());
  return svd.matrixV().rightCols(n - r);
}

// Left null vectors (kernel of a^H), columns orthonormal.
inline Mat left_nullspace(const Mat& a, double rel_tol) {
  return nullspace(Mat(a.adjoint()), rel_tol);
}

// Minimum-norm least-squares solve via SVD.
inline Vec pinv_solve(const Mat& a, const Vec& b, double rel_tol) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(rel_tol);
  return svd.solve(b);
}

// Condition number from the singular spectrum (inf if rank deficient).
inline double condition_number(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) <= 0.0)
    return std::numeric_limits<double>::infinity();
  return s(0) / s(s.size() - 1);
}

// Deterministic normalization: unit Euclidean norm, and the entry of largest
// magnitude rotated to the positive real axis. Ties broken by lowest index.
inline Vec normalize_deterministic(const Vec& v) {
  const double n = v.norm();
  if (n == 0.0) return v;
  Vec w = v / n;
  int imax = 0;
  double best = -1.0;
  for (int i = 0; i < w.size(); ++i) {
    const double m = std::abs(w(i));
    if (m > best + 1e-14) {
      best = m;
      imax = i;
    }
  }
  const cx phase = w(imax) / std::abs(w(imax));
  return w / phase;
}

}  // namespace wedgetrace
