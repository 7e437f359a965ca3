// SPDX-License-Identifier: Apache-2.0
#pragma once

// Contour quadrature. All integrals here are normalized Cauchy integrals:
// the returned value is (1/(2*pi*i)) * integral over the contour. With the
// trapezoid rule on a circle or ellipse the error decays geometrically in the
// node count for integrands analytic in a neighborhood of the contour.

#include <functional>
#include <vector>

#include "wedgetrace/family.hpp"
#include "wedgetrace/linalg.hpp"
#include "wedgetrace/types.hpp"

namespace wedgetrace {

namespace detail {
inline bool finite_value(cx v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}
inline bool finite_value(const Mat& v) { return v.allFinite(); }
}  // namespace detail

// (1/(2*pi*i)) * contour integral of f. Works for any value type supporting
// scalar multiplication and +=  (cx, Vec, Mat).
template <class F>
auto trapezoid_contour_quadrature(const Contour& contour, F&& f) {
  const int n = contour.nodes();
  const double h = 1.0 / n;
  const cx norm = cx(0.0, -1.0) / (2.0 * kPi);  // 1/(2 pi i)
  auto term = [&](int j) {
    const double t = h * j;
    return f(contour.point(t)) * (contour.tangent(t) * h * norm);
  };
  auto acc = term(0);
  for (int j = 1; j < n; ++j) acc += term(j);
  if (!detail::finite_value(acc))
    throw NodeOnSingularity("integrand overflowed at a contour node");
  return acc;
}

// Smallest singular value of F(y, sigma) at each requested sample; zeros are
// legitimate outputs (they locate the spectrum), so no error is raised.
inline std::vector<double> min_singular_value_scan(const MatrixPolyFamily& F,
                                                   double y,
                                                   const std::vector<cx>& samples) {
  if (samples.empty()) throw ConfigError("singular value scan needs samples");
  const PolyMat p = F.at_y(y);
  std::vector<double> out;
  out.reserve(samples.size());
  for (cx s : samples) out.push_back(smallest_singular_value(p.eval(s)));
  return out;
}

// Minimum over the contour nodes of the smallest singular value of F(sigma).
// Used both as an ellipticity probe and as the contour admissibility check.
template <class F>
double min_singular_value_scan(const Contour& contour, F&& eval) {
  double m = std::numeric_limits<double>::infinity();
  const int n = contour.nodes();
  for (int j = 0; j < n; ++j) {
    const cx z = contour.point(static_cast<double>(j) / n);
    m = std::min(m, smallest_singular_value(eval(z)));
  }
  return m;
}

// A contour is admissible for a matrix family when the family stays uniformly
// invertible on it: min sampled singular value >= rank_tol * coefficient scale.
// scale should be the largest coefficient norm of the family.
template <class F>
void require_admissible(const Contour& contour, F&& eval, double scale,
                        double rank_tol) {
  const double m = min_singular_value_scan(contour, eval);
  if (!(m >= rank_tol * scale))
    throw NodeOnSingularity(
        "contour passes too close to a singular point of the family");
}

}  // namespace wedgetrace
