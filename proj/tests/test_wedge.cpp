// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "wedgetrace/fixtures.hpp"
#include "wedgetrace/wedge.hpp"

using namespace wedgetrace;

namespace {

WedgeOperatorSpec model_laplacian(int K, double c) {
  WedgeOperatorSpec spec;
  spec.m = 2;
  spec.rank_e = spec.rank_f = 1;
  spec.gamma = 1.0;
  spec.fiber = FiberBasis::circle(K, c);
  const Mat one = Mat::Identity(1, 1);
  spec.terms = {WedgeTerm{2, 0, 0, CoeffTable::constant(one)},
                WedgeTerm{0, 2, 0, CoeffTable::constant(one)},
                WedgeTerm{0, 0, 2, CoeffTable::constant(one)}};
  return spec;
}

}  // namespace

TEST_CASE("fiber modes interleave zero, positive, negative frequencies") {
  const FiberBasis fb = FiberBasis::circle(5, 0.25);
  const int want[5] = {0, 1, -1, 2, -2};
  for (int k = 0; k < 5; ++k) {
    REQUIRE(fb.frequency(k) == want[k]);
    REQUIRE(fb.lambda_sq(k) == Catch::Approx(want[k] * want[k] + 0.25));
    REQUIRE(fb.index_of_frequency(want[k]) == k);
  }
  REQUIRE(fb.index_of_frequency(3) < 0);
  REQUIRE(fb.index_of_frequency(-3) < 0);

  const FiberBasis pt = FiberBasis::point();
  REQUIRE(pt.K == 1);
  REQUIRE(pt.frequency(0) == 0);
  REQUIRE(pt.lambda_sq(0) == 0.0);
}

TEST_CASE("coefficient tables evaluate x powers and fiber phases") {
  TrigMat three(1, 1);
  three(0, 0) = TrigPoly::constant(3.0);
  CoeffTable table;
  table.add(1, 2, three);
  const cx got = table.value(0.5, 0.0, 0.3, 1, 1)(0, 0);
  const cx want = 3.0 * 0.5 * std::exp(cx(0.0, 2.0 * 0.3));
  REQUIRE(std::abs(got - want) < 1e-15);

  // Only the x^0 part survives at the boundary.
  table.add(0, 0, three);
  const auto slices = table.boundary_slices();
  REQUIRE(slices.size() == 1);
  REQUIRE(slices.count(0) == 1);
  REQUIRE(std::abs(slices.at(0).value(1.0)(0, 0) - cx(3.0)) < 1e-15);

  REQUIRE_THROWS_AS(table.add(-1, 0, three), ConfigError);
}

TEST_CASE("model operator has unimodular principal symbol on the cosphere") {
  const WedgeOperatorSpec spec = model_laplacian(2, 0.25);
  const Mat s = wedge_principal_symbol(spec, 0.2, 1.0, 0.4, cx(0.6), cx(0.8), cx(0.0));
  REQUIRE(std::abs(s(0, 0) - cx(1.0)) < 1e-14);

  const EllipticityReport rep = ellipticity_sample_check(spec, 2048);
  REQUIRE(rep.elliptic());
  REQUIRE(std::abs(rep.min_singular - 1.0) < 1e-12);
}

TEST_CASE("ellipticity sweep detects a degenerate fiber direction") {
  WedgeOperatorSpec spec;
  spec.m = 2;
  spec.rank_e = spec.rank_f = 2;
  spec.gamma = 1.0;
  spec.fiber = FiberBasis::circle(2, 0.25);
  const Mat I2 = Mat::Identity(2, 2);
  Mat dz2 = Mat::Zero(2, 2);
  dz2(0, 0) = 1.0;  // second component drops out along (0, 0, zeta)
  spec.terms = {WedgeTerm{2, 0, 0, CoeffTable::constant(I2)},
                WedgeTerm{0, 2, 0, CoeffTable::constant(I2)},
                WedgeTerm{0, 0, 2, CoeffTable::constant(dz2)}};
  const EllipticityReport rep = ellipticity_sample_check(spec, 2048);
  REQUIRE(rep.min_singular < 0.02);
  REQUIRE_FALSE(rep.elliptic(0.02));
  REQUIRE(std::abs(rep.zeta) > 0.99);
}

TEST_CASE("validation rejects malformed operator tables") {
  WedgeOperatorSpec spec = model_laplacian(2, 0.25);
  spec.terms.push_back(WedgeTerm{2, 1, 0, CoeffTable::constant(Mat::Identity(1, 1))});
  REQUIRE_THROWS_AS(spec.validate(), ConfigError);

  WedgeOperatorSpec pt = model_laplacian(2, 0.25);
  pt.fiber = FiberBasis::point();
  REQUIRE_THROWS_AS(pt.validate(), ConfigError);  // D_z term on a point fiber
}

TEST_CASE("boundary reduction of the coupled table matches the block closed form") {
  const LineBundleExample shape = fixture_linebundle_generic();
  const WedgeOperatorSpec spec = line_bundle_to_wedge(shape, 2, 1.0);
  const MatrixPolyFamily fam = indicial_family(spec, spec.fiber);

  // Retained modes 0 and 1 with lambda_k^2 = n_k^2 + 1.
  LineBundleExample blocks = shape;
  blocks.lambda = {1.0, std::sqrt(2.0)};
  const MatrixPolyFamily want = line_bundle_family(blocks);

  REQUIRE(fam.dim() == 4);
  REQUIRE(fam.degree() == 2);
  for (double y : {0.0, 0.9, 4.2}) {
    for (cx s : {cx(0.3, 0.2), cx(-1.1, 0.7)}) {
      const Mat diff = fam.eval(s, y) - want.eval(s, y);
      REQUIRE(diff.cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("fiber projection routes coupled modes and reports leakage") {
  // Scalar table with one frequency-1 coefficient on a three-mode fiber.
  WedgeOperatorSpec spec;
  spec.m = 2;
  spec.rank_e = spec.rank_f = 1;
  spec.gamma = 1.0;
  spec.fiber = FiberBasis::circle(3, 0.0);
  const Mat one = Mat::Identity(1, 1);
  CoeffTable hop;
  TrigMat unit(1, 1);
  unit(0, 0) = TrigPoly::constant(1.0);
  hop.add(0, 1, unit);
  spec.terms = {WedgeTerm{2, 0, 0, CoeffTable::constant(one)},
                WedgeTerm{0, 0, 0, hop}};

  double leakage = 0.0;
  const MatrixPolyFamily fam = indicial_family(spec, spec.fiber, leakage);
  // Modes are (0, 1, -1); the shift by +1 maps -1 -> 0 and 0 -> 1, and pushes
  // mode 1 out of the span.
  REQUIRE(leakage == Catch::Approx(1.0));
  const Mat c0 = fam.coeff(0).value(0.7);
  Mat want = Mat::Zero(3, 3);
  want(1, 0) = 1.0;
  want(0, 2) = 1.0;
  REQUIRE((c0 - want).cwiseAbs().maxCoeff() < 1e-15);

  REQUIRE_THROWS_AS(indicial_family(spec, spec.fiber), TruncationWarning);
}

TEST_CASE("fully out-of-span coupling trips the truncation alarm") {
  const LineBundleExample shape = fixture_linebundle_generic();
  WedgeOperatorSpec spec = line_bundle_to_wedge(shape, 2, 1.0);
  CoeffTable far;
  far.add(0, 5, TrigMat::constant(Mat::Identity(2, 2)));
  spec.terms.push_back(WedgeTerm{0, 0, 0, far});

  double leakage = 0.0;
  const MatrixPolyFamily fam = indicial_family(spec, spec.fiber, leakage);
  REQUIRE(leakage == Catch::Approx(2.0));
  // The retained blocks are untouched by the dropped coefficient.
  double clean = 0.0;
  WedgeOperatorSpec base = line_bundle_to_wedge(shape, 2, 1.0);
  const MatrixPolyFamily ref = indicial_family(base, base.fiber, clean);
  REQUIRE(clean == 0.0);
  for (int j = 0; j <= 2; ++j) {
    const Mat diff = fam.coeff(j).value(1.3) - ref.coeff(j).value(1.3);
    REQUIRE(diff.cwiseAbs().maxCoeff() < 1e-15);
  }
  REQUIRE_THROWS_AS(indicial_family(spec, spec.fiber), TruncationWarning);
}

TEST_CASE("normal family at zero edge frequency is the boundary reduction") {
  const LineBundleExample shape = fixture_linebundle_generic();
  const WedgeOperatorSpec spec = line_bundle_to_wedge(shape, 2, 1.0);
  const double y = 1.3;

  const HalfLineOperator op0 = normal_family(spec, spec.fiber, y, 0.0);
  REQUIRE(op0.terms.size() == 1);
  REQUIRE(op0.terms.count(0) == 1);

  double leakage = 0.0;
  const MatrixPolyFamily fam = indicial_family(spec, spec.fiber, leakage);
  HalfLineOperator ind;
  ind.dim = fam.dim();
  ind.m = spec.m;
  ind.gamma = spec.gamma;
  ind.terms.emplace(0, fam.at_y(y));
  REQUIRE(term_lists_equal(op0, ind, 1e-13 * std::max(1.0, op0.max_term_norm())));

  // Nonzero frequency adds exactly the x^2 slot carrying eta^2.
  const HalfLineOperator op2 = normal_family(spec, spec.fiber, y, 2.0);
  REQUIRE(op2.terms.size() == 2);
  REQUIRE(op2.terms.count(2) == 1);
  const PolyMat& slot2 = op2.terms.at(2);
  REQUIRE(slot2.degree() == 0);
  const Mat diff = slot2.coeffs()[0] - 4.0 * Mat::Identity(4, 4);
  REQUIRE(diff.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("dilation conjugation is exactly homogeneous at scale two") {
  const LineBundleExample shape = fixture_linebundle_generic();
  const WedgeOperatorSpec spec = line_bundle_to_wedge(shape, 2, 1.0);
  for (double eta : {1.0, 0.7}) {
    for (double y : {0.0, 2.1}) {
      const HalfLineOperator lhs =
          kappa_conjugated(normal_family(spec, spec.fiber, y, eta), 2.0);
      const HalfLineOperator rhs = normal_family(spec, spec.fiber, y, 2.0 * eta);
      REQUIRE(term_lists_equal(lhs, rhs, 0.0));
    }
  }
  const HalfLineOperator op = normal_family(spec, spec.fiber, 0.0, 1.0);
  REQUIRE_THROWS_AS(kappa_conjugated(op, 0.0), ConfigError);
  REQUIRE_THROWS_AS(kappa_conjugated(op, -2.0), ConfigError);
}
