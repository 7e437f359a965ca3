// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "wedgetrace/fixtures.hpp"
#include "wedgetrace/trace.hpp"
#include "wedgetrace/varorder.hpp"

using namespace wedgetrace;

namespace {

// The 2x2 triangular field whose eigenvalues 0.5 +- 0.2 sin y collide at
// y = 0 and y = pi.
EndomorphismField crossing_field() {
  TrigMat m(2, 2);
  m(0, 0) = TrigPoly::affine_sin(0.5, 0.2);
  m(0, 1) = TrigPoly::constant(cx(1.0));
  m(1, 1) = TrigPoly::affine_sin(0.5, -0.2);
  return EndomorphismField(std::move(m));
}

// Random matrix rescaled so the spectrum sits in a disk of radius 2; the
// operator norm bounds the spectral radius without an iterative eigensolve.
Mat random_spectrum_disk(std::mt19937& gen, int n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cx(dist(gen), dist(gen));
  const double bound = a.operatorNorm();
  return Mat(a * (1.8 / std::max(bound, 1e-3)));
}

// Scaling-and-squaring route to rho^a, independent of the contour quadrature.
Mat power_oracle(const Mat& a, double rho) {
  return Mat(std::log(rho) * a).exp();
}

std::vector<Vec> torus_samples(int n, int dim,
                               const std::function<Vec(double)>& f) {
  std::vector<Vec> u;
  u.reserve(n);
  for (int j = 0; j < n; ++j) u.push_back(f(2.0 * kPi * j / n));
  for (auto& v : u) REQUIRE(v.size() == dim);
  return u;
}

// Discrete Fourier coefficients with frequencies in (-n/2, n/2], same grid
// convention as the norm under test but summed through std::complex directly.
std::vector<Vec> dft_oracle(const std::vector<Vec>& u) {
  const int n = static_cast<int>(u.size());
  std::vector<Vec> hat;
  for (int eta = -n / 2 + 1; eta <= n / 2; ++eta) {
    Vec acc = Vec::Zero(u[0].size());
    for (int j = 0; j < n; ++j)
      acc += std::exp(cx(0.0, -2.0 * kPi * eta * j / n)) * u[j];
    hat.push_back(Vec(acc / static_cast<double>(n)));
  }
  return hat;
}

// Classical scalar H^s norm of one component: Parseval with weights <eta>^s.
double multiplier_norm(const std::vector<cx>& samples, double s) {
  const int n = static_cast<int>(samples.size());
  std::vector<Vec> u;
  for (const cx& v : samples) u.push_back(Vec::Constant(1, v));
  const std::vector<Vec> hat = dft_oracle(u);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const int eta = -n / 2 + 1 + k;
    acc += std::pow(1.0 + eta * eta, s) * hat[k].squaredNorm();
  }
  return std::sqrt(acc);
}

const SymbolEstimateRow& row_of(const std::vector<SymbolEstimateRow>& rows,
                                int alpha, int beta) {
  for (const auto& r : rows)
    if (r.alpha == alpha && r.beta == beta) return r;
  FAIL("missing derivative row");
  return rows.front();
}

}  // namespace

TEST_CASE("matrix power reproduces closed-form values") {
  SECTION("zero exponent gives the identity") {
    const Mat z = Mat::Zero(3, 3);
    for (double rho : {0.25, 1.0, 7.5})
      REQUIRE((matrix_power(z, rho) - Mat::Identity(3, 3)).norm() <= 1e-12);
  }
  SECTION("unit base gives the identity") {
    Mat a(2, 2);
    a << cx(0.4, 0.1), cx(1.0), cx(0.0), cx(-0.3, -0.2);
    REQUIRE((matrix_power(a, 1.0) - Mat::Identity(2, 2)).norm() <= 1e-12);
  }
  SECTION("diagonal powers") {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 0.5;
    a(1, 1) = 1.5;
    Mat expect = Mat::Zero(2, 2);
    expect(0, 0) = 2.0;
    expect(1, 1) = 8.0;
    REQUIRE((matrix_power(a, 4.0) - expect).norm() <= 1e-10);
  }
  SECTION("Jordan block picks up the logarithm") {
    Mat a(2, 2);
    a << cx(1.0), cx(1.0), cx(0.0), cx(1.0);
    for (double rho : {0.5, 2.0, 4.0}) {
      Mat expect(2, 2);
      expect << cx(rho), cx(rho * std::log(rho)), cx(0.0), cx(rho);
      REQUIRE((matrix_power(a, rho) - expect).norm() <= 1e-10);
    }
  }
}

TEST_CASE("matrix power agrees with the exponential oracle") {
  std::mt19937 gen(20260815);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat a = random_spectrum_disk(gen, 4);
    for (double rho : {0.25, 0.7, 1.0, 2.2, 4.0}) {
      const Mat got = matrix_power(a, rho);
      REQUIRE((got - power_oracle(a, rho)).norm() <= 1e-10);
    }
  }
}

TEST_CASE("matrix power satisfies the semigroup law") {
  std::mt19937 gen(7071);
  const std::vector<std::pair<double, double>> pairs = {
      {0.25, 4.0}, {0.5, 0.5}, {2.0, 2.0}, {1.3, 2.9}};
  for (int trial = 0; trial < 25; ++trial) {
    const Mat a = random_spectrum_disk(gen, 4);
    for (const auto& [r1, r2] : pairs) {
      const Mat lhs = Mat(matrix_power(a, r1) * matrix_power(a, r2));
      REQUIRE((lhs - matrix_power(a, r1 * r2)).norm() <= 1e-10);
    }
  }
}

TEST_CASE("matrix power rejects contours hugging the spectrum") {
  Mat a = Mat::Zero(2, 2);
  a(1, 1) = 1.5;
  REQUIRE_THROWS_AS(matrix_power(a, 2.0, 8), ContourTooTight);
  REQUIRE_NOTHROW(matrix_power(a, 2.0, 256));
}

TEST_CASE("admissible decomposition separates constant spectra") {
  SECTION("two simple eigenvalues") {
    Mat a = Mat::Zero(2, 2);
    a(1, 1) = 1.0;
    const auto dec =
        admissible_decomposition(EndomorphismField::constant(a), 0.3, 0.25);
    REQUIRE(dec.disks() == 2);
    REQUIRE(std::abs(dec.centers[0]) <= 1e-12);
    REQUIRE(std::abs(dec.centers[1] - cx(1.0)) <= 1e-12);
    REQUIRE(dec.covers_all);
    REQUIRE(dec.half_width == Catch::Approx(kPi).margin(1e-9));
    Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    for (std::size_t j = 0; j < dec.ys.size(); ++j) {
      REQUIRE((dec.projections[0][j] - p0).norm() <= 1e-12);
      REQUIRE((dec.projections[1][j] - p1).norm() <= 1e-12);
    }
  }
  SECTION("one Jordan block keeps a single disk") {
    Mat a(2, 2);
    a << cx(0.6), cx(1.0), cx(0.0), cx(0.6);
    const auto dec =
        admissible_decomposition(EndomorphismField::constant(a), 0.0, 0.25);
    REQUIRE(dec.disks() == 1);
    REQUIRE(std::abs(dec.centers[0] - cx(0.6)) <= 1e-12);
    REQUIRE(dec.covers_all);
    for (std::size_t j = 0; j < dec.ys.size(); ++j)
      REQUIRE((dec.projections[0][j] - Mat::Identity(2, 2)).norm() <= 1e-12);
  }
}

TEST_CASE("admissible decomposition tracks the crossing field") {
  const EndomorphismField field = crossing_field();
  const auto dec = admissible_decomposition(field, kPi / 2, 0.25);

  REQUIRE(dec.disks() == 2);
  REQUIRE(std::abs(dec.centers[0] - cx(0.3)) <= 1e-10);
  REQUIRE(std::abs(dec.centers[1] - cx(0.7)) <= 1e-10);
  REQUIRE_FALSE(dec.covers_all);

  // Containment of 0.5 +- 0.2 sin y in disks of radius min(0.49 delta,
  // 0.45 gap) around 0.3 and 0.7, shrunk by the quarter-radius quadrature
  // margin, fails once sin y < 1 - 0.75 radius / 0.2.
  const double radius = std::min(0.49 * 0.25, 0.45 * 0.4);
  const double expect = kPi / 2 - std::asin(1.0 - 0.75 * radius / 0.2);
  REQUIRE(dec.half_width == Catch::Approx(expect).margin(5e-3));
  REQUIRE(dec.half_width < kPi);

  SECTION("projection identities hold across the window") {
    for (std::size_t j = 0; j < dec.ys.size(); ++j) {
      const Mat a = field.at(dec.ys[j]);
      Mat sum = Mat::Zero(2, 2);
      for (std::size_t l = 0; l < dec.disks(); ++l) {
        const Mat& p = dec.projections[l][j];
        REQUIRE((p * p - p).norm() <= 1e-10);
        REQUIRE((p * a - a * p).norm() <= 1e-10);
        sum += p;
      }
      REQUIRE((sum - Mat::Identity(2, 2)).norm() <= 1e-10);
    }
  }
  SECTION("matrix powers commute with the decomposition") {
    for (std::size_t j = 0; j < dec.ys.size(); j += 8) {
      const Mat a = field.at(dec.ys[j]);
      for (double rho : {2.0, 4.0}) {
        const Mat pw = matrix_power(a, rho);
        Mat split = Mat::Zero(2, 2);
        for (std::size_t l = 0; l < dec.disks(); ++l)
          split += dec.projections[l][j] * pw * dec.projections[l][j];
        REQUIRE((pw - split).norm() <= 1e-10);
      }
    }
  }
}

TEST_CASE("impossible clustering is reported") {
  Mat a = Mat::Zero(3, 3);
  a(1, 1) = 0.12;
  a(2, 2) = 0.24;
  REQUIRE_THROWS_AS(
      admissible_decomposition(EndomorphismField::constant(a), 0.0, 0.25),
      ClusteringImpossible);
}

TEST_CASE("bracket power symbol reduces to scalar powers") {
  const BracketMetric metric;
  SECTION("zero field and zero order give the identity") {
    const auto field = EndomorphismField::constant(Mat::Zero(2, 2));
    REQUIRE((bracket_power_symbol(field, metric, 0.7, 13.0, 0.0) -
             Mat::Identity(2, 2))
                .norm() <= 1e-12);
  }
  SECTION("eta = 0 gives the identity for any field") {
    REQUIRE((bracket_power_symbol(crossing_field(), metric, 1.1, 0.0, 0.4) -
             Mat::Identity(2, 2))
                .norm() <= 1e-12);
  }
  SECTION("constant diagonal entries follow the scalar bracket") {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 0.5;
    a(1, 1) = 1.5;
    const auto field = EndomorphismField::constant(a);
    for (double eta : {0.5, 3.0, 40.0}) {
      const double br = std::sqrt(1.0 + eta * eta);
      const Mat got = bracket_power_symbol(field, metric, 2.0, eta, 0.25);
      REQUIRE(std::abs(got(0, 0) - cx(std::pow(br, 0.75))) <= 1e-10);
      REQUIRE(std::abs(got(1, 1) - cx(std::pow(br, 1.75))) <= 1e-10);
      REQUIRE(std::abs(got(0, 1)) <= 1e-12);
      REQUIRE(std::abs(got(1, 0)) <= 1e-12);
    }
  }
}

TEST_CASE("derivative estimates hold on the crossing field") {
  const auto rows =
      symbol_estimate_check(crossing_field(), BracketMetric(), 0.25, 2, 2);
  REQUIRE(rows.size() == 9);
  for (const auto& r : rows) {
    INFO("alpha " << r.alpha << " beta " << r.beta << " slope " << r.slope
                  << " bound " << r.bound);
    REQUIRE(r.pass);
    if (r.alpha + r.beta <= 2) REQUIRE(r.fd_stable);
  }

  // Pure eta-derivatives are classical of order -beta; the y-derivative rows
  // budget delta per order; the underived row tracks the spectral growth.
  REQUIRE(row_of(rows, 0, 1).slope <= -0.9);
  REQUIRE(row_of(rows, 0, 2).slope <= -1.9);
  REQUIRE(row_of(rows, 1, 0).slope <= 0.35);
  REQUIRE(row_of(rows, 1, 0).bound == Catch::Approx(0.35));
  REQUIRE(row_of(rows, 1, 1).bound == Catch::Approx(-0.65));
  REQUIRE(row_of(rows, 0, 0).slope <= 0.7 + 0.1);

  REQUIRE_THROWS_AS(
      symbol_estimate_check(crossing_field(), BracketMetric(), 0.25, 3, 0),
      ConfigError);
}

TEST_CASE("derivative estimate tables are reproducible") {
  const auto a =
      symbol_estimate_check(crossing_field(), BracketMetric(), 0.25, 1, 0);
  const auto b =
      symbol_estimate_check(crossing_field(), BracketMetric(), 0.25, 1, 0);
  REQUIRE(a.size() == b.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    REQUIRE(a[j].slope == b[j].slope);
    REQUIRE(a[j].constant == b[j].constant);
  }
}

TEST_CASE("variable order norm recovers the classical cases") {
  const BracketMetric metric;
  std::mt19937 gen(99);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  SECTION("zero field and order give the discrete L2 norm") {
    const auto field = EndomorphismField::constant(Mat::Zero(2, 2));
    // Band-limit to |eta| <= 3 so the aliasing guard stays quiet.
    std::vector<Vec> hat;
    for (int eta = -3; eta <= 3; ++eta)
      hat.push_back(Vec(Vec::Random(2) * 0.5));
    auto f = [&](double y) {
      Vec v = Vec::Zero(2);
      for (int eta = -3; eta <= 3; ++eta)
        v += std::exp(cx(0.0, eta * y)) * hat[eta + 3];
      return v;
    };
    const auto u = torus_samples(16, 2, f);
    double l2 = 0.0;
    for (const Vec& v : u) l2 += v.squaredNorm();
    l2 = std::sqrt(l2 / u.size());
    REQUIRE(varorder_norm(u, field, metric, 0.0) ==
            Catch::Approx(l2).margin(1e-12));
  }

  SECTION("single Fourier mode is weighted by one bracket power") {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 0.5;
    a(1, 1) = 1.5;
    Vec v(2);
    v << cx(0.8, -0.1), cx(0.0, -0.5);
    const int eta0 = 3;
    const auto u = torus_samples(
        32, 2, [&](double y) { return Vec(std::exp(cx(0.0, eta0 * y)) * v); });
    const double s = 0.7;
    const double br = std::sqrt(1.0 + eta0 * eta0);
    Vec w(2);
    w << std::pow(br, 0.5 + s) * v(0), std::pow(br, 1.5 + s) * v(1);
    REQUIRE(varorder_norm(u, EndomorphismField::constant(a), metric, s) ==
            Catch::Approx(w.norm()).margin(1e-10));
  }

  SECTION("constant field acts as a Fourier multiplier") {
    Mat a(2, 2);
    a << cx(0.5, 0.0), cx(0.3, 0.1), cx(0.1, 0.0), cx(1.2, 0.0);
    const auto field = EndomorphismField::constant(a);
    std::vector<Vec> modes;
    for (int eta = -3; eta <= 3; ++eta) {
      Vec m(2);
      m << cx(dist(gen), dist(gen)), cx(dist(gen), dist(gen));
      modes.push_back(m);
    }
    auto f = [&](double y) {
      Vec v = Vec::Zero(2);
      for (int eta = -3; eta <= 3; ++eta)
        v += std::exp(cx(0.0, eta * y)) * modes[eta + 3];
      return v;
    };
    const auto u = torus_samples(16, 2, f);
    const double s = 0.4;

    const auto hat = dft_oracle(u);
    double acc = 0.0;
    for (int k = 0; k < 16; ++k) {
      const int eta = -8 + 1 + k;
      const Mat sym = power_oracle(
          Mat(a + s * Mat::Identity(2, 2)), std::sqrt(1.0 + eta * eta));
      acc += Vec(sym * hat[k]).squaredNorm();
    }
    REQUIRE(varorder_norm(u, field, metric, s) ==
            Catch::Approx(std::sqrt(acc)).margin(1e-10));
  }

  SECTION("norm grows with the order on real-spectrum fields") {
    Mat sym(2, 2);
    sym << cx(0.5), cx(0.2), cx(0.2), cx(1.0);
    const auto constant = EndomorphismField::constant(sym);
    TrigMat varying(2, 2);
    varying(0, 0) = TrigPoly::affine_sin(0.5, 0.2);
    varying(1, 1) = TrigPoly::constant(cx(1.0));
    const EndomorphismField diagonal(std::move(varying));

    std::vector<Vec> modes;
    for (int eta = -3; eta <= 3; ++eta) {
      Vec m(2);
      m << cx(dist(gen), dist(gen)), cx(dist(gen), dist(gen));
      modes.push_back(m);
    }
    auto f = [&](double y) {
      Vec v = Vec::Zero(2);
      for (int eta = -3; eta <= 3; ++eta)
        v += std::exp(cx(0.0, eta * y)) * modes[eta + 3];
      return v;
    };
    const auto u = torus_samples(16, 2, f);
    const auto single = torus_samples(16, 2, [&](double y) {
      return Vec(std::exp(cx(0.0, 2.0 * y)) * modes[0]);
    });

    const std::vector<double> orders = {-0.3, 0.4, 1.1};
    for (std::size_t j = 0; j + 1 < orders.size(); ++j) {
      REQUIRE(varorder_norm(u, constant, metric, orders[j]) <=
              varorder_norm(u, constant, metric, orders[j + 1]) + 1e-12);
      REQUIRE(varorder_norm(single, diagonal, metric, orders[j]) <=
              varorder_norm(single, diagonal, metric, orders[j + 1]) + 1e-12);
    }
  }
}

TEST_CASE("variable order norm validates its sampling") {
  const BracketMetric metric;
  const auto field = EndomorphismField::constant(Mat::Zero(1, 1));

  const auto aliased = torus_samples(16, 1, [](double y) {
    return Vec(Vec::Constant(1, std::exp(cx(0.0, 7.0 * y))));
  });
  REQUIRE_THROWS_AS(varorder_norm(aliased, field, metric, 0.0), AliasingError);

  std::vector<Vec> twelve(12, Vec::Ones(1));
  REQUIRE_THROWS_AS(varorder_norm(twelve, field, metric, 0.0), ConfigError);

  std::vector<Vec> wrong_rank(16, Vec::Ones(2));
  REQUIRE_THROWS_AS(varorder_norm(wrong_rank, field, metric, 0.0), ConfigError);
}

TEST_CASE("twisted homogeneity of power symbols") {
  const std::vector<double> ys = {0.3, 1.1, 2.0};
  const std::vector<double> etas = {1.0, 2.0, 4.0, 8.0, 16.0, 64.0};
  const EndomorphismField zero1 = EndomorphismField::constant(Mat::Zero(1, 1));

  SECTION("exact power of |eta| twists by the field itself") {
    const EndomorphismField field = crossing_field();
    const auto p = [&](double y, double eta) {
      return matrix_power(field.at(y), eta);
    };
    const EndomorphismField zero2 =
        EndomorphismField::constant(Mat::Zero(2, 2));
    REQUIRE(twisted_homogeneity_check(p, field, zero2, 0.0, ys, etas) <=
            1e-10);
  }
  SECTION("scalar homogeneous symbol needs no twist") {
    const auto p = [](double, double eta) {
      return Mat(Mat::Constant(1, 1, std::pow(eta, 0.8)));
    };
    REQUIRE(twisted_homogeneity_check(p, zero1, zero1, 0.8, ys, etas) <=
            1e-12);
  }
  SECTION("bracket powers are homogeneous only modulo lower order") {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 0.5;
    a(1, 1) = 1.5;
    auto defect = [&](double eta) {
      const double rho = 2.0;
      const Mat lhs =
          power_oracle(a, std::sqrt(1.0 + rho * eta * rho * eta));
      const Mat rhs =
          power_oracle(a, std::sqrt(1.0 + eta * eta)) * power_oracle(a, rho);
      return (lhs - Mat(rhs)).norm() / lhs.norm();
    };
    REQUIRE(defect(1.0) > defect(8.0));
    REQUIRE(defect(8.0) > defect(64.0));
    REQUIRE(defect(64.0) <= 1e-3);
  }
  SECTION("frequency samples must span [1, 64]") {
    const auto p = [](double, double) { return Mat(Mat::Ones(1, 1)); };
    REQUIRE_THROWS_AS(twisted_homogeneity_check(p, zero1, zero1, 0.0, ys,
                                                {2.0, 8.0, 64.0}),
                      ConfigError);
    REQUIRE_THROWS_AS(twisted_homogeneity_check(p, zero1, zero1, 0.0, ys,
                                                {1.0, 2.0, 4.0}),
                      ConfigError);
  }
}

TEST_CASE("trace sobolev norm specializes to the classical scale") {
  const BracketMetric metric;
  std::mt19937 gen(4242);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  std::vector<cx> modes;
  for (int eta = -3; eta <= 3; ++eta) modes.push_back(cx(dist(gen), dist(gen)));
  auto scalar = [&](double y) {
    cx v = 0.0;
    for (int eta = -3; eta <= 3; ++eta)
      v += std::exp(cx(0.0, eta * y)) * modes[eta + 3];
    return v;
  };

  SECTION("first order traces carry the H^{1/2} norm") {
    const auto field = EndomorphismField::constant(Mat::Zero(1, 1));
    const auto u = torus_samples(
        16, 1, [&](double y) { return Vec(Vec::Constant(1, scalar(y))); });
    std::vector<cx> flat;
    for (const Vec& v : u) flat.push_back(v(0));
    REQUIRE(trace_sobolev_norm(u, field, metric, 0.5) ==
            Catch::Approx(multiplier_norm(flat, 0.5)).margin(1e-12));
  }

  SECTION("second order traces split into H^{3/2} and H^{1/2}") {
    const ClassicalExample ex = fixture_classical(2);
    const auto basis =
        trace_fiber_basis(classical_family(ex), 0.9, ex.strip());
    REQUIRE(basis.size() == 2);
    const Mat m = xdx_endomorphism(basis);
    const auto field = EndomorphismField::constant(m);

    std::vector<double> degrees;
    for (int k = 0; k < 2; ++k) degrees.push_back(std::real(m(k, k)));

    for (int k = 0; k < 2; ++k) {
      REQUIRE(std::abs(m(k, 1 - k)) <= 1e-12);
      const auto u = torus_samples(16, 2, [&](double y) {
        Vec v = Vec::Zero(2);
        v(k) = scalar(y);
        return v;
      });
      std::vector<cx> flat;
      for (const Vec& v : u) flat.push_back(v(k));
      const double order = 1.5 - degrees[k];
      REQUIRE(order == Catch::Approx(degrees[k] < 0.5 ? 1.5 : 0.5));
      REQUIRE(trace_sobolev_norm(u, field, metric, 1.5) ==
              Catch::Approx(multiplier_norm(flat, order)).margin(1e-10));
    }
  }

  SECTION("constant quartic frame decouples into four classical norms") {
    const LineBundleExample ex = fixture_linebundle_constant();
    const auto basis =
        trace_fiber_basis(line_bundle_family(ex), 0.7, ex.strip());
    REQUIRE(basis.size() == 4);
    const Mat m = xdx_endomorphism(basis);

    Eigen::ComplexEigenSolver<Mat> eig(m);
    std::vector<double> expect = {-0.9, -0.7, 0.7, 0.9};
    std::vector<cx> got(eig.eigenvalues().data(), eig.eigenvalues().data() + 4);
    std::sort(got.begin(), got.end(),
              [](cx l, cx r) { return l.real() < r.real(); });
    for (int k = 0; k < 4; ++k) {
      REQUIRE(std::abs(got[k].imag()) <= 1e-9);
      REQUIRE(got[k].real() == Catch::Approx(expect[k]).margin(1e-9));
    }

    // Sections along one eigenvector of x d/dx see exactly one shifted
    // classical order s - d.
    const auto field = EndomorphismField::constant(m);
    const double s = 2.0;
    for (int k = 0; k < 4; ++k) {
      const cx d = eig.eigenvalues()(k);
      const Vec v = eig.eigenvectors().col(k);
      const auto u =
          torus_samples(16, 4, [&](double y) { return Vec(scalar(y) * v); });
      std::vector<cx> flat;
      for (int j = 0; j < 16; ++j) flat.push_back(scalar(2.0 * kPi * j / 16));
      const double direct = v.norm() * multiplier_norm(flat, s - d.real());
      REQUIRE(trace_sobolev_norm(u, field, metric, s) ==
              Catch::Approx(direct).margin(1e-9));
    }
  }
}
