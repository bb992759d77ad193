#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "stokes/entropy.hpp"

using namespace stokes;

namespace {

Vec vec(std::initializer_list<double> x) {
  Vec v(static_cast<Eigen::Index>(x.size()));
  Eigen::Index k = 0;
  for (double a : x) v[k++] = a;
  return v;
}

Mat fd_jac(const Entropy& e, const Vec& z, double h = 1e-6) {
  const int d = static_cast<int>(z.size());
  Mat J(d, d);
  for (int k = 0; k < d; ++k) {
    Vec a = z, b = z;
    a[k] += h;
    b[k] -= h;
    J.col(k) = (e.phi(a) - e.phi(b)) / (2 * h);
  }
  return J;
}

PlanarField gl_w() { return polynomial_field({{1, 0, 0}, {-1, 2, 0}, {-1, 0, 2}}); }
PlanarField tricomi_w(double delta) { return polynomial_field({{1, 0, 0}, {-delta, 2, 0}, {-1, 0, 2}}); }

}  // namespace

TEST_CASE("matrix projections") {
  CHECK(traceless(Mat::Identity(3, 3)).norm() == 0.0);
  Mat m(2, 2);
  m << 1, 2, 3, 4;
  CHECK((sym_part(m) + asym_part(m) - m).norm() == 0.0);
  CHECK((sym_part(m) - sym_part(m).transpose()).norm() == 0.0);
  CHECK((asym_part(m) + asym_part(m).transpose()).norm() == 0.0);
  CHECK(traceless(m).trace() == doctest::Approx(0.0));
}

TEST_CASE("affine homotheties are trivial entropies") {
  Entropy e;
  e.dim = 2;
  e.phi = [](const Vec& z) { return Vec(3 * z + Vec::Ones(2)); };
  e.jac = [](const Vec&) { return Mat(3 * Mat::Identity(2, 2)); };
  e.kind = EntropyKind::strg;
  const auto samples = sample_box(SampleBox::cube(2, 2.0), 11, 100, 1);
  const auto rep = check_punctual(e, builtin_ginzburg_landau(), samples, EntropyKind::strg);
  CHECK(rep.criterion_ok);
  CHECK(rep.max_violation == 0.0);
}

TEST_CASE("wave entropy for Ginzburg-Landau") {
  const Entropy e = entropy_from_wave(gl_w());
  const Potential gl = builtin_ginzburg_landau();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (int k = 0; k < 50; ++k) {
    const Vec z = vec({U(rng), U(rng)});
    const Mat J = e.jac(z);
    CHECK((J - fd_jac(e, z)).norm() <= 1e-6 * (1 + J.norm()));
    // |P0 grad Phi|^2 = 4 W
    CHECK(traceless(J).squaredNorm() == doctest::Approx(4 * gl(z)).epsilon(1e-9));
  }
  const auto rep = check_punctual(e, gl, sample_box(SampleBox::cube(2, 2.0), 21, 500, 2), e.kind);
  CHECK(rep.criterion_ok);
  const auto sat = check_saturation_detail(e, gl, 0.0, vec({0, -1}), vec({0, 1}));
  CHECK(sat.saturated);
  CHECK(sat.phi_jump == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
  CHECK(check_saturation(e, gl, 0.0, vec({0, 1}), vec({0, 1})) == 0.0);
}

TEST_CASE("harmonic entropy is holomorphic") {
  const Entropy e = entropy_from_harmonic(polynomial_field({{1, 1, 1}}));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int k = 0; k < 50; ++k) {
    const Vec z = vec({U(rng), U(rng)});
    const Mat J = fd_jac(e, z);
    // Cauchy-Riemann for Phi1 + i Phi2
    CHECK(std::abs(J(0, 0) - J(1, 1)) <= 1e-6);
    CHECK(std::abs(J(0, 1) + J(1, 0)) <= 1e-6);
  }
}

TEST_CASE("Tricomi entropies") {
  const auto half = [](double) { return 0.5; };
  CHECK_NOTHROW(entropy_tricomi(tricomi_w(0.5), half));
  CHECK_THROWS_AS(entropy_tricomi(tricomi_w(2.0), [](double) { return 2.0; }), EntropyConstructionError);
  // w not solving the Tricomi equation for this f
  CHECK_THROWS_AS(entropy_tricomi(tricomi_w(0.5), [](double) { return 0.9; }), EntropyConstructionError);
  const Entropy e = entropy_tricomi(tricomi_w(0.5), half);
  const Potential p = builtin_w_squared(tricomi_w(0.5), WaveKind::tricomi, half);
  const auto rep = check_punctual(e, p, sample_box(SampleBox::cube(2, 1.5), 21, 500, 3), e.kind);
  CHECK(rep.criterion_ok);
  CHECK(loop_residual(tricomi_w(0.5), half, 50, 1.5, 4) <= 1e-8);
}

TEST_CASE("closed-form Psi_d entropies") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (int d = 2; d <= 4; ++d) {
    const Entropy e = entropy_phi_d(d);
    const Potential W = builtin_Wd(d);
    for (int k = 0; k < 30; ++k) {
      Vec z(d);
      for (int c = 0; c < d; ++c) z[c] = U(rng);
      const Mat J = e.jac(z);
      CHECK((J - J.transpose()).norm() <= 1e-12);
      for (int c = 1; c < d; ++c) CHECK(J(c, c) == doctest::Approx(J(0, 0)));
      CHECK((J - fd_jac(e, z)).norm() <= 1e-5 * (1 + J.norm()));
      CHECK(0.25 * traceless(J).squaredNorm() == doctest::Approx(W(z)).epsilon(1e-10));
    }
  }
  const Entropy e3 = entropy_phi_d(3);
  const auto sat = check_saturation_detail(e3, builtin_Wd(3), 0.0, vec({0, 0, -1}), vec({0, 0, 1}));
  CHECK(std::abs(sat.phi_jump) <= 1e-12);
  CHECK(sat.geod > 0.5);
  CHECK_FALSE(sat.saturated);
}

TEST_CASE("antisymmetric rigidity family") {
  Vec c = vec({0.3, -0.2, 0.5});
  Mat L = Mat::Zero(3, 3);
  L(0, 1) = 1.2;
  L(1, 0) = -1.2;
  L(1, 2) = -0.4;
  L(2, 1) = 0.4;
  const Entropy e = asym_rigidity_entropy(c, L, vec({1, 2, 3}));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int k = 0; k < 20; ++k) {
    const Vec z = vec({U(rng), U(rng), U(rng)});
    const Mat T = traceless(fd_jac(e, z));
    CHECK((T + T.transpose()).norm() <= 1e-6);
  }
  const Entropy trivial = asym_rigidity_entropy(Vec::Zero(3), Mat::Zero(3, 3), vec({1, 2, 3}));
  CHECK((trivial.phi(vec({0.4, 5, -1})) - vec({1, 2, 3})).norm() == 0.0);
  const auto fit = asym_rigidity_regression(3, 1);
  CHECK(fit.nullspace_dim == fit.family_dim);
}

TEST_CASE("calibration value and boundary difference") {
  const Potential gl = builtin_ginzburg_landau();
  const Entropy e = entropy_from_wave(gl_w());
  const CylinderGrid g(2, 8.0, 64, 16);
  Field c(g, vec({0, 1}), vec({0, 1}));
  for (int i = 0; i < g.n1; ++i)
    for (long j = 0; j < g.n_perp(); ++j) c.set_node(i, j, vec({0, 1}));
  CHECK(calibration_value(e, c) == doctest::Approx(0.0));
  CHECK(pde_residual(e, gl, c, e.kind).pde_l2 <= 1e-10);

  const Vec um = vec({0, -1}), up = vec({0, 1});
  const Field f = random_div_free_field(gl, g, um, up, 3, 0.3);
  const double jump = e.phi(up)[0] - e.phi(um)[0];
  CHECK(calibration_value(e, f) == doctest::Approx(jump).epsilon(1e-10));
  CHECK(calibration_value(e, f) <= energy(gl, f));

  const auto tc = tricomi_identity_check(tricomi_w(0.5), [](double) { return 0.5; }, c);
  CHECK(std::abs(tc.residual) <= 1e-12);
}

TEST_CASE("reduced 3D ODE") {
  const auto tr = ode3d_solve(1.0, Eigen::Vector2d(0, 0), 0.0, 6.0, 1e-3);
  CHECK_FALSE(tr.blew_up);
  double err = 0;
  for (size_t k = 0; k < tr.t.size(); ++k) {
    err = std::max(err, std::abs(tr.v[k][0] - std::tanh(tr.t[k])));
    err = std::max(err, std::abs(tr.v[k][1]));
  }
  CHECK(err <= 1e-6);
  // v3 keeps its sign
  const auto s = ode3d_solve(1.0, Eigen::Vector2d(0, -0.5), 0.0, 10.0, 1e-3);
  for (const auto& v : s.v) CHECK(v[1] < 0);
  // the line v2 + v3 = 1 is invariant
  const auto line = ode3d_solve(1.0, Eigen::Vector2d(0.5, 0.5), 0.0, 5.0, 1e-3);
  for (const auto& v : line.v) CHECK(std::abs(v[0] + v[1] - 1) <= 1e-8);
}
