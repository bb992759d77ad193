#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "stokes/metric.hpp"

using namespace stokes;

namespace {

Vec vec(std::initializer_list<double> x) {
  Vec v(static_cast<Eigen::Index>(x.size()));
  Eigen::Index k = 0;
  for (double a : x) v[k++] = a;
  return v;
}

Mat equilateral(int n, double c = 1.0) {
  Mat m = Mat::Constant(n, n, c);
  m.diagonal().setZero();
  return m;
}

// a well-spread triangle in the plane
std::vector<Vec> triangle() { return {vec({0, 0}), vec({1.5, 0}), vec({0.4, 1.3})}; }

}  // namespace

TEST_CASE("smooth step") {
  CHECK(smooth_g(0.5).first == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(smooth_g(-1).first == 0.0);
  CHECK(smooth_g(2).first == 1.0);
  CHECK(smooth_g(0).second == 0.0);
  CHECK(smooth_g(1).second == 0.0);
  double prev = 0;
  for (int k = 1; k < 200; ++k) {
    const double t = k / 200.0;
    const auto [g, dg] = smooth_g(t);
    CHECK(g >= prev);
    prev = g;
    CHECK(g + smooth_g(1 - t).first == doctest::Approx(1.0).epsilon(1e-12));
    // derivative against central differences
    const double fd = (smooth_g(t + 1e-6).first - smooth_g(t - 1e-6).first) / 2e-6;
    CHECK(dg == doctest::Approx(fd).epsilon(1e-5));
  }
  // the derivative is the normalized bump exp(-1/(t(1-t)))
  const double bump = std::exp(-1 / (0.3 * 0.7)) / std::exp(-4.0);
  CHECK(smooth_g(0.3).second / smooth_g(0.5).second == doctest::Approx(bump).epsilon(1e-8));
}

TEST_CASE("pseudo-metric audit") {
  CHECK(validate_pseudo_metric(equilateral(4)).valid);
  CHECK(validate_pseudo_metric(Mat::Zero(3, 3)).valid);
  Mat bad(3, 3);
  bad << 0, 3, 1, 3, 0, 1, 1, 1, 0;
  const auto a = validate_pseudo_metric(bad);
  CHECK_FALSE(a.valid);
  CHECK_FALSE(a.triangle_ok);
  CHECK(a.worst_violation == doctest::Approx(1.0));
  Mat asym = equilateral(3);
  asym(0, 1) = 2;
  CHECK_FALSE(validate_pseudo_metric(asym).symmetric);
}

TEST_CASE("cut metrics") {
  Mat expect(2, 2);
  expect << 0, 1, 1, 0;
  CHECK((cut_metric(0b01, 2) - expect).norm() == 0.0);
  CHECK_THROWS(cut_metric(0, 3));
  CHECK_THROWS(cut_metric(0b111, 3));
  // every cut pseudo-metric satisfies the triangle inequality
  for (int n = 2; n <= 6; ++n)
    for (Subset Y = 1; Y + 1 < (Subset(1) << n); ++Y) {
      const Mat c = cut_metric(Y, n);
      CHECK(validate_pseudo_metric(c).valid);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) CHECK(c(i, j) == double(((Y >> i) & 1) != ((Y >> j) & 1)));
    }
}

TEST_CASE("cut decompositions") {
  SUBCASE("equilateral triangle") {
    const auto dec = decompose_cuts(equilateral(3));
    CHECK(dec.feasible);
    REQUIRE(dec.weights.size() == 3);
    for (const auto& [Y, w] : dec.weights) CHECK(w == doctest::Approx(0.5));
    CHECK((reconstruct(dec, 3) - equilateral(3)).norm() <= 1e-12);
  }
  SUBCASE("two points") {
    Mat m(2, 2);
    m << 0, 2.5, 2.5, 0;
    const auto dec = decompose_cuts(m);
    CHECK(dec.feasible);
    REQUIRE(dec.weights.size() == 1);
    CHECK(dec.weights.begin()->second == doctest::Approx(2.5));
  }
  SUBCASE("scaling covariance") {
    Mat m(4, 4);
    m << 0, 1, 2, 2, 1, 0, 1, 2, 2, 1, 0, 1, 2, 2, 1, 0;
    const auto d1 = decompose_cuts(m);
    const auto d3 = decompose_cuts(3 * m);
    CHECK(d1.feasible);
    CHECK(d3.feasible);
    CHECK((reconstruct(d3, 4) - 3 * reconstruct(d1, 4)).norm() <= 1e-9);
  }
  SUBCASE("K_{2,3} graph metric is not a cut combination") {
    // shortest-path metric of K_{2,3}, a classic non-l1-embeddable example
    Mat m(5, 5);
    m << 0, 2, 1, 1, 1,
         2, 0, 1, 1, 1,
         1, 1, 0, 2, 2,
         1, 1, 2, 0, 2,
         1, 1, 2, 2, 0;
    const auto dec = decompose_cuts(m);
    CHECK_FALSE(dec.feasible);
    CHECK(dec.residual > 1e-6);
  }
  CHECK_THROWS_AS(decompose_cuts(Mat::Zero(1, 1)), MetricError);
  Mat bad(3, 3);
  bad << 0, 3, 1, 3, 0, 1, 1, 1, 0;
  CHECK_THROWS_AS(decompose_cuts(bad), MetricError);
}

TEST_CASE("nonnegative least squares") {
  Mat A(3, 2);
  A << 1, 0, 0, 1, 1, 1;
  const Vec x = nnls(A, vec({1, -1, 0}));
  CHECK(x.minCoeff() >= 0);
  // unconstrained optimum is (1, -1); with x >= 0 the best is (0.5, 0)
  CHECK(x[0] == doctest::Approx(0.5));
  CHECK(x[1] == doctest::Approx(0.0));
}

TEST_CASE("affine bases") {
  CHECK(is_affine_basis(triangle()));
  CHECK_FALSE(is_affine_basis({vec({0, 0}), vec({1, 1}), vec({2, 2})}));
  CHECK_FALSE(is_affine_basis({vec({0, 0}), vec({1, 0}), vec({0, 1}), vec({1, 1})}));
}

TEST_CASE("calibration functions") {
  const auto X = triangle();
  const CalibrationFn phi(X, 0b001);
  CHECK(phi.lambda0() > 0);
  CHECK(phi.lambda0() <= 0.5);
  CHECK(CalibrationFn::separation_ok(X, phi.lambda0()));
  for (int i = 0; i < 3; ++i) CHECK(phi.value(X[i]) == doctest::Approx(phi.in_Y(i) ? 0.0 : 1.0));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1, 2.5);
  for (int k = 0; k < 200; ++k) {
    const Vec z = vec({U(rng), U(rng)});
    Vec fd(2);
    for (int c = 0; c < 2; ++c) {
      Vec a = z, b = z;
      a[c] += 1e-7;
      b[c] -= 1e-7;
      fd[c] = (phi.value(a) - phi.value(b)) / 2e-7;
    }
    CHECK((phi.gradient(z) - fd).norm() <= 1e-5 * (1 + fd.norm()));
  }
  CHECK_THROWS_AS(CalibrationFn(X, 0b111), MetricError);
  CHECK_THROWS_AS(CalibrationFn({vec({0, 0}), vec({1, 1}), vec({2, 2})}, 0b001), MetricError);
}

TEST_CASE("weight function") {
  FiniteMetric m;
  m.points = triangle();
  m.delta = equilateral(3);
  const WeightFunction w(m);
  for (const Vec& x : m.points) CHECK(w.value(x) == doctest::Approx(0.0).epsilon(1e-12));
  // far from X only the w1 part remains
  CHECK(w.value(vec({10, 10})) == doctest::Approx(std::sqrt(2.0)));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> U(-1, 2.5);
  for (int k = 0; k < 200; ++k) {
    const Vec z = vec({U(rng), U(rng)});
    bool at_point = false;
    for (const Vec& x : m.points) at_point = at_point || (z - x).norm() < 1e-3;
    if (!at_point) CHECK(w.value(z) > 0);
    CHECK(w.potential()(z) == doctest::Approx(0.5 * w.value(z) * w.value(z)));
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      CHECK(segment_length(w, m.points[i], m.points[j]) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("segment optimality") {
  SUBCASE("single cut") {
    FiniteMetric m;
    m.points = triangle();
    m.delta = cut_metric(0b010, 3);
    const auto rep = verify_segment_optimality(WeightFunction(m), m, 20, 1, false);
    CHECK(rep.pass);
  }
  SUBCASE("equilateral") {
    FiniteMetric m;
    m.points = triangle();
    m.delta = equilateral(3);
    const auto rep = verify_segment_optimality(WeightFunction(m), m, 20, 2, false);
    CHECK(rep.pass);
    for (const auto& p : rep.pairs) CHECK(p.defeats == 0);
  }
  SUBCASE("square is not an affine basis") {
    FiniteMetric m;
    m.points = {vec({0, 0}), vec({1, 0}), vec({1, 1}), vec({0, 1})};
    m.delta.resize(4, 4);
    m.delta << 0, 2, 1, 2, 2, 0, 2, 1, 1, 2, 0, 2, 2, 1, 2, 0;
    CHECK_THROWS_WITH_AS(WeightFunction{m}, doctest::Contains("affine basis"), MetricError);
  }
}
