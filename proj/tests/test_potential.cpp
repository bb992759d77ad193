#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "stokes/potential.hpp"

using namespace stokes;

namespace {

Vec vec(std::initializer_list<double> x) {
  Vec v(static_cast<Eigen::Index>(x.size()));
  Eigen::Index k = 0;
  for (double a : x) v[k++] = a;
  return v;
}

// central differences, independent of any gradient the potential carries
Vec fd_grad(const Potential& p, const Vec& z, double h = 1e-6) {
  Vec g(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    Vec zp = z, zm = z;
    zp[k] += h;
    zm[k] -= h;
    g[k] = (p(zp) - p(zm)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("Ginzburg-Landau values and gradient") {
  const Potential gl = builtin_ginzburg_landau();
  CHECK(gl.dim() == 2);
  CHECK(gl(vec({1, 0})) == doctest::Approx(0.0));
  CHECK(gl(vec({0, 0})) == doctest::Approx(0.5));
  CHECK(gl.grad(vec({0, 0})).norm() == doctest::Approx(0.0));
  CHECK(gl(vec({0.6, 0.8})) == doctest::Approx(0.0).epsilon(1e-14));
  // 0.5 (1 - r^2)^2 at r^2 = 4
  CHECK(gl(vec({2, 0})) == doctest::Approx(4.5));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int k = 0; k < 50; ++k) {
    const Vec z = vec({U(rng), U(rng)});
    CHECK((gl.grad(z) - fd_grad(gl, z)).norm() <= 1e-6 * (1 + gl.grad(z).norm()));
  }
}

TEST_CASE("w squared potentials") {
  const auto z1z2 = polynomial_field({{1, 1, 1}});
  const Potential h = builtin_w_squared(z1z2, WaveKind::harmonic);
  CHECK(h(vec({1, 1})) == doctest::Approx(0.5));
  CHECK(h(vec({2, 3})) == doctest::Approx(18.0));
  const Vec z = vec({0.7, -1.3});
  CHECK((h.grad(z) - fd_grad(h, z)).norm() <= 1e-6);

  const auto w = polynomial_field({{1, 0, 0}, {-0.5, 2, 0}, {-1, 0, 2}});
  CHECK_NOTHROW(builtin_w_squared(w, WaveKind::tricomi, [](double) { return 0.5; }));
  CHECK_THROWS(builtin_w_squared(w, WaveKind::tricomi, [](double) { return 2.0; }));
}

TEST_CASE("W_d values") {
  const Potential w3 = builtin_Wd(3);
  CHECK(w3(vec({1, 1, 0})) == doctest::Approx(0.5));
  CHECK(w3(vec({0, 0, 1})) == doctest::Approx(0.0));
  CHECK(w3(vec({0, 0, -1})) == doctest::Approx(0.0));
  CHECK(w3(vec({0.6, 0.8, 0})) == doctest::Approx(0.0).epsilon(1e-14));
  for (const Vec& well : w3.known_wells()) CHECK(w3(well) <= 1e-12);
  const Vec z = vec({0.3, -0.4, 0.9});
  CHECK((w3.grad(z) - fd_grad(w3, z)).norm() <= 1e-6);
  const Potential w4 = builtin_Wd(4);
  const Vec z4 = vec({0.1, 0.5, -0.7, 0.2});
  CHECK((w4.grad(z4) - fd_grad(w4, z4)).norm() <= 1e-6);
}

TEST_CASE("wells on a slice") {
  SUBCASE("GL") {
    const auto ws = find_wells_on_slice(builtin_ginzburg_landau(), 0.0, SliceBox::cube(2, 2.0), 400);
    REQUIRE(ws.wells.size() == 2);
    CHECK(ws.wells[0].point[1] == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(ws.wells[1].point[1] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_FALSE(ws.non_isolated);
  }
  SUBCASE("z1 z2 has a continuum on a = 0") {
    const auto p = builtin_w_squared(polynomial_field({{1, 1, 1}}), WaveKind::harmonic);
    const auto ws = find_wells_on_slice(p, 0.0, SliceBox::cube(2, 2.0), 200);
    CHECK(ws.non_isolated);
  }
  SUBCASE("W_3") {
    const auto ws = find_wells_on_slice(builtin_Wd(3), 0.0, SliceBox::cube(3, 2.0), 41);
    REQUIRE(ws.wells.size() == 4);
    for (const auto& w : ws.wells) {
      CHECK(std::abs(w.point.norm() - 1.0) <= 1e-8);
      // (0, +-1, 0) or (0, 0, +-1)
      CHECK(std::abs(w.point[1] * w.point[2]) <= 1e-8);
    }
  }
}

TEST_CASE("rotations") {
  const Potential gl = builtin_ginzburg_landau();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-2, 2);
  const auto id = rotate_potential(gl, RotationFrame::identity(2));
  const auto rot = rotate_potential(gl, RotationFrame::planar(2, 0.77));
  for (int k = 0; k < 100; ++k) {
    const Vec z = vec({U(rng), U(rng)});
    CHECK(id(z) == doctest::Approx(gl(z)));
    CHECK(rot(z) == doctest::Approx(gl(z)));
  }
  const auto p = builtin_w_squared(polynomial_field({{1, 1, 1}}), WaveKind::harmonic);
  const auto pr = rotate_potential(p, RotationFrame::planar(2, M_PI / 4));
  // the rotation either way maps (sqrt2, 0) to (1, +-1); both have W = 0.5
  CHECK(pr(vec({std::sqrt(2.0), 0})) == doctest::Approx(0.5));
  const Vec z = vec({0.4, -1.1});
  Vec fd(2);
  for (int k = 0; k < 2; ++k) {
    Vec a = z, b = z;
    a[k] += 1e-6;
    b[k] -= 1e-6;
    fd[k] = (pr(a) - pr(b)) / 2e-6;
  }
  CHECK((pr.grad(z) - fd).norm() <= 1e-6);

  Vec nu = vec({1, 2, 2}) / 3.0;
  const auto fr = RotationFrame::from_normal(nu);
  CHECK(fr.valid());
  CHECK((fr.R * nu - vec({1, 0, 0})).norm() <= 1e-12);
}

TEST_CASE("builtin tags") {
  for (const char* t : {"gl", "wd2", "wd3", "wd4", "z1z2", "tricomi"}) CHECK(builtin_by_tag(t).has_value());
  CHECK_FALSE(builtin_by_tag("nope").has_value());
}
