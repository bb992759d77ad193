#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "stokes/cylinder.hpp"

using namespace stokes;

namespace {

Vec vec(std::initializer_list<double> x) {
  Vec v(static_cast<Eigen::Index>(x.size()));
  Eigen::Index k = 0;
  for (double a : x) v[k++] = a;
  return v;
}

Field constant_field(const CylinderGrid& g, const Vec& c) {
  Field f(g, c, c);
  for (int i = 0; i < g.n1; ++i)
    for (long j = 0; j < g.n_perp(); ++j) f.set_node(i, j, c);
  return f;
}

double max_diff(const Field& a, const Field& b) {
  double m = 0;
  for (size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

}  // namespace

TEST_CASE("grid geometry") {
  const CylinderGrid g(3, 5.0, 32, 8);
  CHECK(g.n_perp() == 64);
  CHECK(g.n_nodes() == 64 * 32);
  CHECK(g.h1() == doctest::Approx(10.0 / 31));
  double sum = 0;
  for (int i = 0; i < g.n1; ++i) sum += g.w1(i);
  CHECK(sum == doctest::Approx(10.0));
  CHECK_THROWS(CylinderGrid(2, 5.0, 33, 8));
}

TEST_CASE("stream functions give divergence-free fields") {
  const CylinderGrid g(2, 10.0, 128, 16);
  StreamFunction s = stream_with_switch(g, 0.0, -1, 1);
  add_stream_noise(s, 3, 0.2);
  const Field f = from_stream(s);
  CHECK(divergence_max(f) <= 1e-12);
  for (const Vec& m : slice_average(f)) CHECK(std::abs(m[0]) <= 1e-10);
  const auto avg = slice_average(f);
  CHECK((avg.front() - vec({0, -1})).norm() <= 1e-10);
  CHECK((avg.back() - vec({0, 1})).norm() <= 1e-10);

  const StreamFunction zero = stream_with_switch(g, 0.0, 0, 0);
  const Field z = from_stream(zero);
  for (double v : z.values) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("divergence of a linear field") {
  const CylinderGrid g(2, 3.0, 32, 8);
  Field f(g, vec({-3, 0}), vec({3, 0}));
  for (int i = 0; i < g.n1; ++i)
    for (long j = 0; j < g.n_perp(); ++j) f.set_node(i, j, vec({g.x1(i), 0}));
  CHECK(divergence_max(f) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("projection") {
  const Potential gl = builtin_ginzburg_landau();
  const CylinderGrid g(2, 8.0, 64, 16);
  Field f = constant_field(g, vec({0, 1}));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N(0, 0.3);
  for (int i = 1; i + 1 < g.n1; ++i)
    for (long j = 0; j < g.n_perp(); ++j)
      for (int c = 0; c < 2; ++c) f.at(i, j, c) += N(rng);
  const Field p1 = project_div_free(f);
  CHECK(divergence_max(p1) <= 1e-8);
  const Field p2 = project_div_free(p1);
  CHECK(max_diff(p1, p2) <= 1e-10);

  StreamFunction s = stream_with_switch(g, 0.0, -1, 1);
  add_stream_noise(s, 4, 0.2);
  const Field df = from_stream(s);
  CHECK(max_diff(df, project_div_free(df)) <= 1e-10);

  const CylinderGrid g3(3, 4.0, 16, 8);
  Field f3 = constant_field(g3, vec({0, 0, 1}));
  for (int i = 1; i + 1 < g3.n1; ++i)
    for (long j = 0; j < g3.n_perp(); ++j)
      for (int c = 0; c < 3; ++c) f3.at(i, j, c) += N(rng);
  CHECK(divergence_max(project_div_free(f3)) <= 1e-8);
}

TEST_CASE("energy of simple fields") {
  const Potential gl = builtin_ginzburg_landau();
  const CylinderGrid g(2, 10.0, 64, 8);
  CHECK(energy(gl, constant_field(g, vec({0, 1}))) == doctest::Approx(0.0));
  // W(0, 0.5) = 0.5 (0.75)^2 over a cylinder of volume 2L
  CHECK(energy(gl, constant_field(g, vec({0, 0.5}))) == doctest::Approx(20 * 0.28125).epsilon(1e-12));

  const CylinderGrid fine(2, 10.0, 512, 16);
  const Profile1D prof = transition_profile(gl, vec({0, -1}), vec({0, 1}));
  const Field emb = embed_profile(fine, prof, vec({0, -1}), vec({0, 1}));
  CHECK(energy(gl, emb) == doctest::Approx(4.0 / 3.0).epsilon(1e-3));
  CHECK(slice_variance(emb) <= 1e-14);

  std::vector<double> grad;
  const double e0 = energy_gradient(gl, emb, grad);
  // directional derivative along a fixed interior perturbation
  Field pert = emb;
  const long off = pert.offset(200, 3) + 1;
  const double h = 1e-6;
  pert.values[off] += h;
  const double e1 = energy(gl, pert);
  pert.values[off] -= 2 * h;
  const double em = energy(gl, pert);
  CHECK((e1 - em) / (2 * h) == doctest::Approx(grad[off]).epsilon(1e-5));
  CHECK(e0 == doctest::Approx(energy(gl, emb)));
}

TEST_CASE("slice variance of a single mode") {
  const CylinderGrid g(2, 4.0, 16, 32);
  const double eps = 0.1;
  Field f(g, vec({0, -1}), vec({0, 1}));
  for (int i = 0; i < g.n1; ++i)
    for (long j = 0; j < g.n_perp(); ++j)
      f.set_node(i, j, vec({0, eps * std::sin(2 * M_PI * g.xp(j, 0))}));
  // eps^2 / 2 over |u+ - u-|^2 = 4
  CHECK(slice_variance(f) == doctest::Approx(eps * eps / 8).epsilon(0.05));
}

TEST_CASE("Jin-Kohn and Stokes residual on trivial fields") {
  const Potential gl = builtin_ginzburg_landau();
  const CylinderGrid g(2, 6.0, 64, 8);
  const auto jk0 = jin_kohn_check(constant_field(g, vec({0, 0})));
  CHECK(jk0.sym == 0.0);
  CHECK(jk0.asym == 0.0);
  CHECK(jk0.full == 0.0);
  const Field one_d = embed_profile(g, transition_profile(gl, vec({0, -1}), vec({0, 1})), vec({0, -1}),
                                    vec({0, 1}));
  const auto jk = jin_kohn_check(one_d);
  CHECK(jk.sym == doctest::Approx(jk.asym).epsilon(1e-12));
  CHECK(residual_stokes(gl, constant_field(g, vec({0, 1}))) <= 1e-10);
}

TEST_CASE("minimization from the 1D layer") {
  const Potential gl = builtin_ginzburg_landau();
  const CylinderGrid g(2, 6.0, 96, 8);
  InitSpec init;
  init.kind = InitKind::profile_embed;
  MinimizeOptions mo;
  mo.trace_every = 5;
  const auto [f, rep] = minimize(gl, g, vec({0, -1}), vec({0, 1}), init, mo);
  CHECK(rep.energy == doctest::Approx(4.0 / 3.0).epsilon(0.01));
  CHECK(rep.slice_variance <= 1e-6);
  CHECK(rep.divergence_max <= 1e-8);
  // energies on the trace never increase
  for (size_t k = 1; k < rep.trace.size(); ++k) CHECK(rep.trace[k].energy <= rep.trace[k - 1].energy + 1e-12);
}

TEST_CASE("equal wells relax to the constant") {
  const Potential gl = builtin_ginzburg_landau();
  const CylinderGrid g(2, 4.0, 32, 8);
  InitSpec init;
  init.kind = InitKind::random;
  init.seed = 2;
  MinimizeOptions mo;
  mo.trace_every = 0;
  const auto [f, rep] = minimize(gl, g, vec({0, 1}), vec({0, 1}), init, mo);
  CHECK(rep.energy <= 1e-8);
}

TEST_CASE("effective potential bounds") {
  const Potential gl = builtin_ginzburg_landau();
  CHECK(effective_potential_V(gl, 0.0, vec({0, 1}), TorusGrid{1, 16}).value <= 1e-6);
  for (double y : {-0.5, 0.0, 0.3, 1.5}) {
    const double V = effective_potential_V(gl, 0.0, vec({0, y}), TorusGrid{1, 16}).value;
    CHECK(V > 0);
    CHECK(V <= gl(vec({0, y})) + 1e-8);
  }
}
