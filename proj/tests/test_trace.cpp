// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "wedgetrace/fixtures.hpp"
#include "wedgetrace/trace.hpp"

using namespace wedgetrace;

namespace {

Vec vec2(cx a, cx b) {
  Vec v(2);
  v << a, b;
  return v;
}

double element_distance(const TraceElement& a, const TraceElement& b) {
  TermKeys keys = TermKeys::collect({a, b});
  const int dim = std::max(a.dim(), b.dim());
  return (keys.flatten(a, dim) - keys.flatten(b, dim)).norm();
}

// Distance from target to the span of the basis, relative to the target norm.
double span_residual(const std::vector<TraceElement>& basis,
                     const TraceElement& target) {
  std::vector<TraceElement> all = basis;
  all.push_back(target);
  TermKeys keys = TermKeys::collect(all);
  const int dim = target.dim();
  Mat B(static_cast<int>(keys.size()) * dim, static_cast<int>(basis.size()));
  for (size_t j = 0; j < basis.size(); ++j)
    B.col(static_cast<int>(j)) = keys.flatten(basis[j], dim);
  const Vec t = keys.flatten(target, dim);
  Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return (B * svd.solve(t) - t).norm() / t.norm();
}

bool has_log_term(const TraceElement& e) {
  for (const auto& t : e.terms)
    if (t.ell > 0) return true;
  return false;
}

MatrixPolyFamily crossing_mode0() {
  LineBundleExample ex = fixture_linebundle_crossing();
  ex.lambda = {1.0};
  return line_bundle_family(ex);
}

}  // namespace

TEST_CASE("principal part extraction isolates simple poles") {
  Mat c0 = Mat::Zero(2, 2);
  c0(1, 1) = cx(0.0, 1.0);
  MatrixPolyFamily F = MatrixPolyFamily::from_constant({c0, Mat::Identity(2, 2)});
  PolyMat rhs = PolyMat::constant(vec2(1.0, 1.0));

  SingularPart near0 = singular_part(F, 0.0, Contour::circle(0.0, 0.4, 128), rhs);
  REQUIRE(near0.poles.size() == 1);
  REQUIRE(std::abs(near0.poles[0].sigma) <= 1e-10);
  REQUIRE(near0.poles[0].order() == 1);
  REQUIRE((near0.poles[0].coeff[0] - vec2(1.0, 0.0)).norm() <= 1e-10);

  SingularPart both =
      singular_part(F, 0.0, Contour::circle(cx(0.0, -0.5), 1.0, 256), rhs);
  REQUIRE(both.poles.size() == 2);
  REQUIRE(std::abs(both.poles[0].sigma - cx(0.0, -1.0)) <= 1e-10);
  REQUIRE((both.poles[0].coeff[0] - vec2(0.0, 1.0)).norm() <= 1e-10);
  REQUIRE((both.poles[1].coeff[0] - vec2(1.0, 0.0)).norm() <= 1e-10);

  PolyMat bad = PolyMat::constant(Vec::Ones(3));
  REQUIRE_THROWS_AS(singular_part(F, 0.0, Contour::circle(0.0, 0.4, 128), bad),
                    ConfigError);
}

TEST_CASE("double pole principal part carries the full order") {
  MatrixPolyFamily F = MatrixPolyFamily::from_constant(
      {Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Identity(1, 1)});
  SingularPart sp = singular_part(F, 0.0, Contour::circle(0.0, 0.5, 128),
                                  PolyMat::constant(Vec::Ones(1)));
  REQUIRE(sp.poles.size() == 1);
  REQUIRE(sp.poles[0].order() == 2);
  REQUIRE(std::abs(sp.poles[0].coeff[0](0)) <= 1e-10);
  REQUIRE(std::abs(sp.poles[0].coeff[1](0) - cx(1.0)) <= 1e-10);
}

TEST_CASE("principal parts do not depend on the representative") {
  MatrixPolyFamily F = line_bundle_family(fixture_linebundle_generic());
  const double y = 1.1;
  Vec e2 = Vec::Zero(4);
  e2(1) = 1.0;
  PolyMat rhs = PolyMat::constant(e2);

  // Add a polynomial multiple of the family itself; the inverse picks up an
  // entire function, so principal parts cannot move.
  Mat q0 = Vec::Ones(4) * cx(0.3, 0.1);
  Mat q1 = Vec::Ones(4) * cx(0.0, -0.2);
  Mat q2 = Vec::Ones(4) * cx(0.05, 0.0);
  PolyMat shifted = rhs + F.at_y(y) * PolyMat({q0, q1, q2});

  const Contour circle = Contour::circle(0.0, 0.95, 512);
  SingularPart a = singular_part(F, y, circle, rhs);
  SingularPart b = singular_part(F, y, circle, shifted);
  REQUIRE(a.poles.size() == b.poles.size());
  REQUIRE(element_distance(to_trace_element(a), to_trace_element(b)) <= 1e-9);
}

TEST_CASE("projection onto principal parts is idempotent") {
  MatrixPolyFamily F = line_bundle_family(fixture_linebundle_generic());
  SingularPart sp = singular_part(F, 0.4, Contour::circle(0.0, 0.95, 512),
                                  PolyMat::constant(Vec::Ones(4)));
  REQUIRE(!sp.poles.empty());

  std::vector<detail::PoleSite> sites;
  std::vector<cx> locations;
  for (const auto& p : sp.poles) {
    sites.push_back({p.sigma, p.order()});
    locations.push_back(p.sigma);
  }
  auto f = [&](cx z) { return sp.value(z); };
  SingularPart again = detail::extract_singular_part(f, sites, locations, 0.2);
  REQUIRE(again.poles.size() == sp.poles.size());
  REQUIRE(element_distance(to_trace_element(again), to_trace_element(sp)) <= 1e-10);
}

TEST_CASE("pole dictionary produces residue-exact log coefficients") {
  SingularPart sp;
  PolePart p;
  p.sigma = cx(0.3, -0.2);
  p.coeff = {vec2(1.0, 2.0), vec2(0.0, 1.0)};
  sp.poles.push_back(p);

  TraceElement e = to_trace_element(sp);
  REQUIRE(e.terms.size() == 2);
  REQUIRE(e.terms[0].ell == 0);
  REQUIRE((e.terms[0].coeff - vec2(cx(0.0, -1.0), cx(0.0, -2.0))).norm() <= 1e-15);
  REQUIRE(e.terms[1].ell == 1);
  REQUIRE((e.terms[1].coeff - vec2(0.0, 1.0)).norm() <= 1e-15);
}

TEST_CASE("indicial action annihilates kernel expansions exactly") {
  MatrixPolyFamily sq = MatrixPolyFamily::from_constant(
      {Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Identity(1, 1)});
  TraceElement logx;
  logx.add_term(0.0, 1, Vec::Ones(1));
  REQUIRE(apply_indicial(sq, 0.0, logx).coeff_norm() == 0.0);

  MatrixPolyFamily ladder = classical_family(fixture_classical(2));
  TraceElement x1;
  x1.add_term(cx(0.0, -1.0), 0, Vec::Ones(1));
  REQUIRE(apply_indicial(ladder, 0.3, x1).coeff_norm() == 0.0);
}

TEST_CASE("trace basis of the classical ladder") {
  ClassicalExample ex = fixture_classical(2);
  MatrixPolyFamily F = classical_family(ex);
  auto basis = trace_fiber_basis(F, 0.7, ex.strip());
  REQUIRE(basis.size() == 2);

  // Poles sorted by imaginary part: x^1 (sigma = -i) first, then 1.
  REQUIRE(basis[0].terms.size() == 1);
  REQUIRE(std::abs(basis[0].terms[0].sigma - cx(0.0, -1.0)) <= 1e-10);
  REQUIRE(std::abs(basis[0].terms[0].coeff(0) - cx(1.0)) <= 1e-12);
  REQUIRE(std::abs(basis[1].terms[0].sigma) <= 1e-10);
  REQUIRE(std::abs(basis[1].terms[0].coeff(0) - cx(1.0)) <= 1e-12);

  // Before normalization each chain carries the residue factor -i.
  auto raw = detail::fiber_singular_parts(F.at_y(0.7),
                                          companion_solve(F, 0.7, ex.strip()),
                                          1e-10);
  REQUIRE(raw.size() == 2);
  REQUIRE(std::abs(to_trace_element(raw[0]).terms[0].coeff(0) - cx(0.0, -1.0)) <=
          1e-12);

  for (const auto& e : basis)
    REQUIRE(apply_indicial(F, 0.7, e).coeff_norm() <= 1e-10);

  Mat M = xdx_endomorphism(basis);
  REQUIRE(std::abs(M(0, 0) - cx(1.0)) <= 1e-10);
  REQUIRE(std::abs(M(1, 1)) <= 1e-10);
  REQUIRE(std::abs(M(0, 1)) + std::abs(M(1, 0)) <= 1e-10);
}

TEST_CASE("trace basis spans powers and logs at a defective point") {
  MatrixPolyFamily F = MatrixPolyFamily::from_constant(
      {Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Identity(1, 1)});
  Strip strip{1.0, 2.0};
  auto basis = trace_fiber_basis(F, 0.0, strip);
  REQUIRE(basis.size() == 2);
  REQUIRE(!has_log_term(basis[0]));
  REQUIRE(has_log_term(basis[1]));
  REQUIRE(std::abs(basis[1].terms.back().coeff(0) - cx(1.0)) <= 1e-10);

  for (const auto& e : basis)
    REQUIRE(apply_indicial(F, 0.0, e).coeff_norm() <= 1e-10);

  Mat M = xdx_endomorphism(basis);
  REQUIRE(std::abs(M(0, 1) - cx(1.0)) <= 1e-8);
  REQUIRE(std::abs(M(0, 0)) + std::abs(M(1, 0)) + std::abs(M(1, 1)) <= 1e-8);
  REQUIRE((M * M).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("strip spectrum eigenvectors surface in the quartic basis") {
  LineBundleExample ex = fixture_linebundle_generic();
  MatrixPolyFamily F = line_bundle_family(ex);
  const double y = 1.1;
  auto basis = trace_fiber_basis(F, y, ex.strip());
  REQUIRE(basis.size() == 4);

  const double p11 = 0.49 + 0.05 * std::sin(y);
  REQUIRE(std::abs(basis[0].terms[0].sigma - cx(0.0, -0.9)) <= 1e-9);
  REQUIRE(std::abs(basis[1].terms[0].sigma - cx(0.0, -std::sqrt(p11))) <= 1e-9);

  // sigma^2 = -phi22 rides the mixed kernel vector; mode-1 slots stay empty.
  const Vec& mixed = basis[0].terms[0].coeff;
  REQUIRE(std::abs(mixed(2)) + std::abs(mixed(3)) <= 1e-9);
  const cx ratio = mixed(0) / mixed(1);
  REQUIRE(std::abs(ratio - cx(1.0) / (p11 - 0.81)) <= 1e-9);

  // sigma^2 = -phi11 stays along the first slot.
  const Vec& pure = basis[1].terms[0].coeff;
  REQUIRE(std::abs(pure(0) - cx(1.0)) <= 1e-9);
  REQUIRE(pure.tail(3).norm() <= 1e-9);

  for (const auto& e : basis)
    REQUIRE(apply_indicial(F, y, e).coeff_norm() <= 1e-8);
}

TEST_CASE("collision basis matches the closed-form frame") {
  LineBundleExample ex = fixture_linebundle_crossing();
  ex.lambda = {1.0};
  MatrixPolyFamily F = crossing_mode0();
  CollisionReference ref = collision_frame_reference(ex, 0.0);

  auto basis = trace_fiber_basis(F, 0.0, ex.strip());
  REQUIRE(basis.size() == 4);
  REQUIRE(!has_log_term(basis[0]));
  REQUIRE(has_log_term(basis[1]));
  REQUIRE(!has_log_term(basis[2]));
  REQUIRE(has_log_term(basis[3]));

  // Depth-0 elements are the eigenvector expansions chi1 +/- exactly.
  TraceElement chi1p = normalize_trace_element(to_trace_element(ref.residue[0]));
  TraceElement chi1m = normalize_trace_element(to_trace_element(ref.residue[1]));
  REQUIRE(element_distance(basis[2], chi1p) <= 1e-10);
  REQUIRE(element_distance(basis[0], chi1m) <= 1e-10);

  // Log-bearing closed forms lie in the numeric span (chains are unique only
  // up to adding eigenvector multiples), and both routes annihilate under the
  // indicial action.
  for (int k : {2, 3}) {
    TraceElement closed = normalize_trace_element(to_trace_element(ref.residue[k]));
    REQUIRE(has_log_term(closed));
    REQUIRE(span_residual(basis, closed) <= 1e-8);
    REQUIRE(apply_indicial(F, 0.0, closed).coeff_norm() <= 1e-12);
    TraceElement printed = normalize_trace_element(to_trace_element(ref.printed[k]));
    REQUIRE(apply_indicial(F, 0.0, printed).coeff_norm() <= 1e-12);
  }
  for (const auto& e : basis)
    REQUIRE(apply_indicial(F, 0.0, e).coeff_norm() <= 1e-8);

  std::vector<TraceElement> all = basis;
  for (int k = 0; k < 4; ++k)
    all.push_back(normalize_trace_element(to_trace_element(ref.residue[k])));
  TermKeys keys = TermKeys::collect(all);
  Mat B(static_cast<int>(keys.size()) * 2, 8);
  for (int j = 0; j < 8; ++j) B.col(j) = keys.flatten(all[j], 2);
  REQUIRE(numeric_rank(B, 1e-8) == 4);
}

TEST_CASE("direct principal parts at a collision match the residue oracle") {
  LineBundleExample ex = fixture_linebundle_crossing();
  ex.lambda = {1.0};
  MatrixPolyFamily F = crossing_mode0();
  CollisionReference ref = collision_frame_reference(ex, 0.0);
  const Contour circle = Contour::circle(0.0, 1.0, 512);

  Vec e1 = vec2(1.0, 0.0), e2 = vec2(0.0, 1.0);
  SingularPart from_e2 = singular_part(F, 0.0, circle, PolyMat::constant(e2));
  REQUIRE(from_e2.poles.size() == 2);
  REQUIRE(std::abs(from_e2.poles[0].sigma - ref.sigma_minus) <= 1e-10);
  REQUIRE(std::abs(from_e2.poles[1].sigma - ref.sigma_plus) <= 1e-10);
  for (int side = 0; side < 2; ++side) {
    const PolePart& got = from_e2.poles[side];
    const PolePart& want = ref.residue[side == 0 ? 3 : 2].poles[0];
    REQUIRE(got.order() == 2);
    REQUIRE((got.coeff[0] - want.coeff[0]).norm() <= 1e-9);
    REQUIRE((got.coeff[1] - want.coeff[1]).norm() <= 1e-9);
  }

  // The e1 column has only simple poles; the trailing order must be trimmed.
  SingularPart from_e1 = singular_part(F, 0.0, circle, PolyMat::constant(e1));
  REQUIRE(from_e1.poles.size() == 2);
  REQUIRE(from_e1.poles[1].order() == 1);
  REQUIRE((from_e1.poles[1].coeff[0] -
           Vec(e1 * cx(0.0, -0.7071067811865476))).norm() <= 1e-9);
  REQUIRE((from_e1.poles[1].coeff[0] - ref.residue[0].poles[0].coeff[0]).norm() <=
          1e-9);
}

TEST_CASE("frame continuation is stationary for constant families") {
  MatrixPolyFamily F = line_bundle_family(fixture_linebundle_constant());
  TraceFrame frame =
      frame_continuation(F, 0.0, 6, Contour::circle(0.0, 1.0, 512));
  REQUIRE(frame.y.size() == 6);
  REQUIRE(frame.elements.size() == 6);
  for (const auto& row : frame.elements) REQUIRE(row.size() == 4);
  for (int j = 1; j < 6; ++j)
    for (int k = 0; k < 4; ++k)
      REQUIRE(element_distance(frame.elements[j][k], frame.elements[0][k]) <=
              1e-9);
}

TEST_CASE("frame continuation through a collision keeps full rank") {
  LineBundleExample ex = fixture_linebundle_crossing();
  ex.lambda = {1.0};
  MatrixPolyFamily F = crossing_mode0();
  TraceFrame frame =
      frame_continuation(F, 0.0, 8, Contour::circle(0.0, 1.0, 512));
  REQUIRE(frame.elements.size() == 8);

  // Continued elements stay in the pointwise trace fiber away from y0, and
  // remain kernel expansions everywhere, including the collision at y = pi.
  auto pointwise = trace_fiber_basis(F, frame.y[1], ex.strip());
  for (const auto& e : frame.elements[1])
    REQUIRE(span_residual(pointwise, e) <= 1e-7);
  for (int j = 0; j < 8; ++j)
    for (const auto& e : frame.elements[j])
      REQUIRE(apply_indicial(F, frame.y[j], e).coeff_norm() <=
              1e-7 * std::max(1.0, e.coeff_norm()));
}

TEST_CASE("continued frames of a conformal family stay parallel") {
  ClassicalExample ex = fixture_classical(2, true);
  MatrixPolyFamily F = classical_family(ex);
  const double y0 = kPi / 2.0;
  TraceFrame frame =
      frame_continuation(F, y0, 8, Contour::circle(cx(0.0, -0.5), 0.9, 256));
  auto base = trace_fiber_basis(F, y0, ex.strip());
  REQUIRE(base.size() == 2);

  // F(., y) = a(y) q_2: continuation rescales every element by a(y0)/a(y).
  const double a0 = 2.0 + std::sin(y0);
  for (size_t j = 0; j < frame.y.size(); ++j) {
    const double ay = 2.0 + std::sin(frame.y[j]);
    for (int k = 0; k < 2; ++k) {
      TraceElement want = base[k].scaled(cx(0.0, -1.0) * (a0 / ay));
      TraceElement alt = base[k].scaled(cx(0.0, 1.0) * (a0 / ay));
      TraceElement plain = base[k].scaled(cx(a0 / ay));
      const double d =
          std::min({element_distance(frame.elements[j][k], want),
                    element_distance(frame.elements[j][k], alt),
                    element_distance(frame.elements[j][k], plain)});
      REQUIRE(d <= 1e-9);
    }
  }
}

TEST_CASE("mellin quadrature matches the boundary pole formula") {
  LogGrid grid(1e-8, 1.0, 64, 8);
  const cx s0(0.3, -0.2);
  auto u = [&](double x) { return std::exp(cx(0.0, 1.0) * s0 * std::log(x)); };
  for (cx s : {cx(0.7, 0.8), cx(0.3, 1.8), cx(-0.4, 1.1)}) {
    const cx got = mellin_quadrature(grid, u, s);
    const cx want = 1.0 / (cx(0.0, 1.0) * (s0 - s));
    REQUIRE(std::abs(got - want) <= 1e-6);
  }
  std::vector<cx> short_samples(3, cx(1.0));
  REQUIRE_THROWS_AS(mellin_quadrature(grid, short_samples, cx(0.0)), ConfigError);
}

TEST_CASE("mellin pole fit recovers trace exponents") {
  ClassicalExample ex = fixture_classical(2);
  MatrixPolyFamily F = classical_family(ex);
  auto basis = trace_fiber_basis(F, 0.0, ex.strip());
  LogGrid grid(1e-8, 1.0, 64, 8);

  const std::vector<cx> expected{cx(0.0, -1.0), cx(0.0, 0.0)};
  for (int k = 0; k < 2; ++k) {
    auto u = [&](double x) { return basis[k].value(x)(0); };
    const cx s1 = expected[k] + cx(0.3, 1.5);
    const cx s2 = expected[k] + cx(-0.3, 1.5);
    const cx u1 = mellin_quadrature(grid, u, s1);
    const cx u2 = mellin_quadrature(grid, u, s2);
    const cx fitted = (u1 * s1 - u2 * s2) / (u1 - u2);
    REQUIRE(std::abs(fitted - expected[k]) <= 1e-6);
  }
}

TEST_CASE("poles too close to separate raise") {
  Mat c0 = Mat::Zero(2, 2);
  c0(1, 1) = -1e-4;
  MatrixPolyFamily F = MatrixPolyFamily::from_constant({c0, Mat::Identity(2, 2)});
  REQUIRE_THROWS_AS(singular_part(F, 0.0, Contour::circle(0.0, 0.3, 256),
                                  PolyMat::constant(Vec::Ones(2))),
                    PoleSeparationFailure);
}

TEST_CASE("xdx endomorphism rejects non-invariant spans") {
  TraceElement lonely_log;
  lonely_log.add_term(0.0, 1, Vec::Ones(1));
  REQUIRE_THROWS_AS(xdx_endomorphism({lonely_log}), NotInvariant);
}

TEST_CASE("xdx eigenvalues are similarity invariant") {
  LineBundleExample ex = fixture_linebundle_generic();
  MatrixPolyFamily F = line_bundle_family(ex);
  const double y = 1.1;
  auto basis = trace_fiber_basis(F, y, ex.strip());

  std::vector<TraceElement> rescaled;
  const std::vector<cx> factors{cx(1.0, 0.5), cx(-2.0, 0.0), cx(0.0, 0.3),
                                cx(0.7, -0.2)};
  for (int k = 0; k < 4; ++k) rescaled.push_back(basis[k].scaled(factors[k]));

  auto sorted_eigs = [](const Mat& M) {
    Eigen::ComplexEigenSolver<Mat> es(M);
    std::vector<cx> v(es.eigenvalues().data(),
                      es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(v.begin(), v.end(), [](cx a, cx b) {
      return std::make_pair(a.real(), a.imag()) <
             std::make_pair(b.real(), b.imag());
    });
    return v;
  };
  auto e1 = sorted_eigs(xdx_endomorphism(basis));
  auto e2 = sorted_eigs(xdx_endomorphism(rescaled));

  // Eigenvalues are i sigma_p: real numbers +/- sqrt(phi_jj).
  const double root = std::sqrt(0.49 + 0.05 * std::sin(y));
  const std::vector<double> want{-0.9, -root, root, 0.9};
  for (int k = 0; k < 4; ++k) {
    REQUIRE(std::abs(e1[k] - e2[k]) <= 1e-9);
    REQUIRE(std::abs(e1[k] - want[k]) <= 1e-9);
  }
}

TEST_CASE("fiber dimension is constant along the parameter circle") {
  LineBundleExample ex = fixture_linebundle_crossing();
  ex.lambda = {1.0};
  MatrixPolyFamily F = crossing_mode0();
  for (double y : {0.0, 0.7, kPi / 2.0, kPi, 4.0})
    REQUIRE(trace_fiber_basis(F, y, ex.strip()).size() == 4);
}
