// SPDX-License-Identifier: Apache-2.0
#pragma once

// Shared value types: the horizontal strip that bounds a weight interval, the
// integration contours, the logarithmic radial grid and the run configuration.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "wedgetrace/errors.hpp"
#include "wedgetrace/trig.hpp"

namespace wedgetrace {

// Horizontal strip gamma - order < Im(sigma) < gamma in the Mellin plane.
// The two boundary lines are exactly the weight lines that a half-line
// operator of the given order connects.
struct Strip {
  double gamma = 0.0;
  double order = 1.0;

  double upper() const { return gamma; }
  double lower() const { return gamma - order; }
  bool contains(cx sigma) const {
    return sigma.imag() > lower() && sigma.imag() < upper();
  }
  double height() const { return order; }
  // Strip of the adjoint family: reflection across the real axis.
  Strip adjoint() const { return Strip{order - gamma, order}; }
};

// Positively oriented closed contour with an explicit trapezoid node set.
// kind selects the parametrization; nodes are equispaced in the parameter so
// the trapezoid rule is spectrally accurate for circle and ellipse.
class Contour {
 public:
  enum class Kind { Circle, Ellipse, Rectangle };

  static Contour circle(cx center, double radius, int nodes = 256) {
    if (radius <= 0.0) throw ConfigError("contour radius must be positive");
    Contour c;
    c.kind_ = Kind::Circle;
    c.center_ = center;
    c.rx_ = c.ry_ = radius;
    c.set_nodes(nodes);
    return c;
  }

  static Contour ellipse(cx center, double rx, double ry, int nodes = 256) {
    if (rx <= 0.0 || ry <= 0.0)
      throw ConfigError("contour radii must be positive");
    Contour c;
    c.kind_ = Kind::Ellipse;
    c.center_ = center;
    c.rx_ = rx;
    c.ry_ = ry;
    c.set_nodes(nodes);
    return c;
  }

  // Axis-aligned rectangle with half-extents hx, hy about the center.
  static Contour rectangle(cx center, double hx, double hy, int nodes = 256) {
    if (hx <= 0.0 || hy <= 0.0)
      throw ConfigError("rectangle half-extents must be positive");
    Contour c;
    c.kind_ = Kind::Rectangle;
    c.center_ = center;
    c.rx_ = hx;
    c.ry_ = hy;
    c.set_nodes(nodes);
    return c;
  }

  Kind kind() const { return kind_; }
  cx center() const { return center_; }
  double radius_x() const { return rx_; }
  double radius_y() const { return ry_; }
  int nodes() const { return nodes_; }

  Contour with_nodes(int n) const {
    Contour c = *this;
    c.set_nodes(n);
    return c;
  }

  // Point on the contour at parameter t in [0,1).
  cx point(double t) const {
    switch (kind_) {
      case Kind::Circle:
      case Kind::Ellipse: {
        const double a = 2.0 * kPi * t;
        return center_ + cx(rx_ * std::cos(a), ry_ * std::sin(a));
      }
      case Kind::Rectangle:
        return rect_point(t);
    }
    return center_;
  }

  // Derivative dz/dt of the parametrization, for quadrature weights.
  cx tangent(double t) const {
    switch (kind_) {
      case Kind::Circle:
      case Kind::Ellipse: {
        const double a = 2.0 * kPi * t;
        return 2.0 * kPi * cx(-rx_ * std::sin(a), ry_ * std::cos(a));
      }
      case Kind::Rectangle:
        return rect_tangent(t);
    }
    return cx(0.0);
  }

  bool encloses(cx sigma) const {
    const cx d = sigma - center_;
    switch (kind_) {
      case Kind::Circle:
      case Kind::Ellipse: {
        const double u = d.real() / rx_, v = d.imag() / ry_;
        return u * u + v * v < 1.0;
      }
      case Kind::Rectangle:
        return std::abs(d.real()) < rx_ && std::abs(d.imag()) < ry_;
    }
    return false;
  }

  // Distance from a point to the node set (used for singularity guards).
  double min_node_distance(cx sigma) const {
    double m = std::numeric_limits<double>::infinity();
    for (int j = 0; j < nodes_; ++j)
      m = std::min(m, std::abs(point(static_cast<double>(j) / nodes_) - sigma));
    return m;
  }

  // Spacing between adjacent nodes, as a singularity clearance scale.
  double node_spacing() const {
    const cx p0 = point(0.0), p1 = point(1.0 / nodes_);
    return std::abs(p1 - p0);
  }

 private:
  void set_nodes(int n) {
    if (n < 16) throw ConfigError("contours need at least 16 nodes");
    nodes_ = n;
  }

  // Rectangle traversed counterclockwise, one quarter of the parameter per
  // side; nodes_ is kept a multiple-of-4 friendly count by the caller.
  cx rect_point(double t) const {
    const double s = 4.0 * t;
    if (s < 1.0) return center_ + cx(rx_, ry_ * (2.0 * s - 1.0));
    if (s < 2.0) return center_ + cx(rx_ * (1.0 - 2.0 * (s - 1.0)), ry_);
    if (s < 3.0) return center_ + cx(-rx_, ry_ * (1.0 - 2.0 * (s - 2.0)));
    return center_ + cx(rx_ * (2.0 * (s - 3.0) - 1.0), -ry_);
  }

  cx rect_tangent(double t) const {
    const double s = 4.0 * t;
    if (s < 1.0) return cx(0.0, 8.0 * ry_);
    if (s < 2.0) return cx(-8.0 * rx_, 0.0);
    if (s < 3.0) return cx(0.0, -8.0 * ry_);
    return cx(8.0 * rx_, 0.0);
  }

  Kind kind_ = Kind::Circle;
  cx center_{0.0, 0.0};
  double rx_ = 1.0;
  double ry_ = 1.0;
  int nodes_ = 256;
};

// Radial grid on [x0, x1], 0 < x0 < x1, built from composite Gauss-Legendre
// panels in t = log x. Quadrature of f against the measure x^m dx/x is then
// sum_i w_i f(x_i) x_i^m with the log-space weights w_i. The grid itself is
// the truncation: nothing below x0 is ever sampled.
class LogGrid {
 public:
  LogGrid(double x0, double x1, int panels = 64, int order = 8) {
    if (!(0.0 < x0 && x0 < x1)) throw ConfigError("log grid needs 0 < x0 < x1");
    if (panels < 1 || order < 2) throw ConfigError("bad log grid resolution");
    x0_ = x0;
    x1_ = x1;
    panels_ = panels;
    order_ = order;
    build();
  }

  double x0() const { return x0_; }
  double x1() const { return x1_; }
  int panels() const { return panels_; }
  int order() const { return order_; }
  std::size_t size() const { return x_.size(); }
  const std::vector<double>& points() const { return x_; }
  // Weight for integration against dx/x (i.e. dt in t = log x).
  const std::vector<double>& log_weights() const { return w_; }

  LogGrid refined() const { return LogGrid(x0_, x1_, 2 * panels_, order_); }

  // integral over [x0,x1] of f(x) dx/x
  template <class F>
  auto integrate_dlog(F&& f) const {
    auto acc = f(x_[0]) * w_[0];
    for (std::size_t i = 1; i < x_.size(); ++i) acc += f(x_[i]) * w_[i];
    return acc;
  }

 private:
  void build() {
    // Gauss-Legendre nodes/weights on [-1,1] by Newton on Legendre polynomials.
    std::vector<double> gn(order_), gw(order_);
    for (int i = 0; i < order_; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (order_ + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= order_; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        const double dp = order_ * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order_; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = order_ * (x * p1 - p0) / (x * x - 1.0);
      gn[i] = x;
      gw[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    const double t0 = std::log(x0_), t1 = std::log(x1_);
    const double h = (t1 - t0) / panels_;
    x_.reserve(static_cast<std::size_t>(panels_) * order_);
    w_.reserve(x_.capacity());
    for (int p = 0; p < panels_; ++p) {
      const double a = t0 + p * h;
      for (int i = order_ - 1; i >= 0; --i) {  // ascending in t
        const double t = a + 0.5 * h * (gn[i] + 1.0);
        x_.push_back(std::exp(t));
        w_.push_back(0.5 * h * gw[i]);
      }
    }
  }

  double x0_ = 0.0, x1_ = 1.0;
  int panels_ = 0, order_ = 0;
  std::vector<double> x_, w_;
};

// Tolerances and resource knobs shared across the pipeline. Defaults are the
// values every test and the CLI assume unless a config file overrides them.
struct RunConfig {
  double rank_tol = 1e-10;      // relative singular-value cutoff
  double residual_tol = 1e-8;   // eigenpair acceptance
  double match_tol = 1e-7;      // curve matching, relative to spectral scale
  int contour_nodes = 256;      // default trapezoid node count
  double delta = 0.25;          // admissible-decomposition separation
  double cutoff_a = 0.25;       // cutoff transition start
  double cutoff_b = 0.75;       // cutoff transition end (1 beyond support)
  double pairing_cond_bound = 1e6;  // nondegeneracy threshold for pairings
  int threads = 1;
  std::string out_dir = ".";
};

}  // namespace wedgetrace
