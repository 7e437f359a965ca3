// SPDX-License-Identifier: Apache-2.0
#pragma once

// Trigonometric polynomials on the parameter circle Y = R/2piZ, stored as
// complex Fourier coefficients c_n over a symmetric frequency window. These
// are the coefficient functions of every y-dependent object in the library;
// keeping them as exact coefficient tables lets symbolic identities (adjoint,
// derivative, conjugation) be computed without sampling error.

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <vector>

namespace wedgetrace {

using cx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;

class TrigPoly {
 public:
  TrigPoly() = default;
  explicit TrigPoly(cx constant) {
    if (constant != cx(0.0)) coeff_[0] = constant;
  }

  static TrigPoly constant(cx c) { return TrigPoly(c); }

  // c * e^{i n y}
  static TrigPoly harmonic(int n, cx c) {
    TrigPoly p;
    if (c != cx(0.0)) p.coeff_[n] = c;
    return p;
  }

  // a + b sin y (real coefficients in the common fixture form)
  static TrigPoly affine_sin(double a, double b) {
    TrigPoly p = TrigPoly(cx(a));
    p.add_term(1, cx(0.0, -b / 2.0));
    p.add_term(-1, cx(0.0, b / 2.0));
    return p;
  }

  // a + b cos y
  static TrigPoly affine_cos(double a, double b) {
    TrigPoly p = TrigPoly(cx(a));
    p.add_term(1, cx(b / 2.0, 0.0));
    p.add_term(-1, cx(b / 2.0, 0.0));
    return p;
  }

  // Exact trig interpolation of samples on the uniform grid y_j = 2pi j/N.
  // Frequencies are placed in (-N/2, N/2]; for even N the Nyquist coefficient
  // is assigned to +N/2. Inputs of trig degree < N/2 are recovered exactly.
  static TrigPoly from_samples(const std::vector<cx>& samples) {
    const int n = static_cast<int>(samples.size());
    TrigPoly p;
    for (int k = 0; k < n; ++k) {
      cx acc(0.0);
      for (int j = 0; j < n; ++j) {
        const double ang = -2.0 * kPi * k * j / n;
        acc += samples[j] * cx(std::cos(ang), std::sin(ang));
      }
      acc /= static_cast<double>(n);
      const int freq = (k <= n / 2) ? k : k - n;
      p.add_term(freq, acc);
    }
    p.trim();
    return p;
  }

  cx value(double y) const {
    cx acc(0.0);
    for (const auto& [n, c] : coeff_) {
      const double ang = n * y;
      acc += c * cx(std::cos(ang), std::sin(ang));
    }
    return acc;
  }

  // d/dy
  TrigPoly derivative() const {
    TrigPoly p;
    for (const auto& [n, c] : coeff_)
      if (n != 0) p.coeff_[n] = c * cx(0.0, static_cast<double>(n));
    return p;
  }

  // Complex conjugate as a function of real y: c_n -> conj(c_{-n}).
  TrigPoly conjugated() const {
    TrigPoly p;
    for (const auto& [n, c] : coeff_) p.add_term(-n, std::conj(c));
    return p;
  }

  TrigPoly& operator+=(const TrigPoly& o) {
    for (const auto& [n, c] : o.coeff_) add_term(n, c);
    trim();
    return *this;
  }

  friend TrigPoly operator+(TrigPoly a, const TrigPoly& b) { return a += b; }

  friend TrigPoly operator*(const TrigPoly& a, const TrigPoly& b) {
    TrigPoly p;
    for (const auto& [n, c] : a.coeff_)
      for (const auto& [m, d] : b.coeff_) p.add_term(n + m, c * d);
    p.trim();
    return p;
  }

  friend TrigPoly operator*(cx s, const TrigPoly& a) {
    TrigPoly p;
    for (const auto& [n, c] : a.coeff_) p.add_term(n, s * c);
    p.trim();
    return p;
  }

  bool is_zero() const { return coeff_.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& [n, c] : coeff_) d = std::max(d, std::abs(n));
    return d;
  }

  const std::map<int, cx>& coefficients() const { return coeff_; }

  void add_term(int n, cx c) {
    auto it = coeff_.find(n);
    if (it == coeff_.end()) {
      if (c != cx(0.0)) coeff_[n] = c;
    } else {
      it->second += c;
    }
  }

 private:
  void trim() {
    for (auto it = coeff_.begin(); it != coeff_.end();) {
      if (std::abs(it->second) == 0.0)
        it = coeff_.erase(it);
      else
        ++it;
    }
  }

  std::map<int, cx> coeff_;
};

}  // namespace wedgetrace
