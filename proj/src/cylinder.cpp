#include "stokes/cylinder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "stokes/lbfgs.hpp"
#include "stokes/parallel.hpp"

namespace stokes {

CylinderGrid::CylinderGrid(int d_, double L_, int n1_, int np_) : d(d_), L(L_), n1(n1_), np(np_) {
  if (d < 2) throw std::invalid_argument("CylinderGrid: d must be >= 2");
  if (n1 < 8 || np < 8) throw std::invalid_argument("CylinderGrid: n1 and np must be >= 8");
  if (n1 % 2 != 0) throw std::invalid_argument("CylinderGrid: n1 must be even");
  if (!(L > 0)) throw std::invalid_argument("CylinderGrid: L must be positive");
}

long CylinderGrid::n_perp() const {
  long n = 1;
  for (int k = 0; k < d - 1; ++k) n *= np;
  return n;
}

double CylinderGrid::cell_volume() const { return h1() * std::pow(hp(), d - 1); }

double CylinderGrid::xp(long j, int k) const {
  for (int q = 0; q < k; ++q) j /= np;
  return (j % np) * hp();
}

long CylinderGrid::shift(long j, int k, int step) const {
  long stride = 1;
  for (int q = 0; q < k; ++q) stride *= np;
  const long digit = (j / stride) % np;
  const long moved = ((digit + step) % np + np) % np;
  return j + (moved - digit) * stride;
}

Field::Field(const CylinderGrid& g, const Vec& um, const Vec& up)
    : grid(g), values(g.n_nodes() * g.d, 0.0), u_minus(um), u_plus(up) {
  if (um.size() != g.d || up.size() != g.d) throw std::invalid_argument("Field: bc dimension");
  apply_bc();
}

Vec Field::node(int i, long j) const {
  return Eigen::Map<const Vec>(&values[offset(i, j)], grid.d);
}

void Field::set_node(int i, long j, const Vec& v) {
  Eigen::Map<Vec>(&values[offset(i, j)], grid.d) = v;
}

void Field::apply_bc() {
  for (long j = 0; j < grid.n_perp(); ++j) {
    set_node(0, j, u_minus);
    set_node(grid.n1 - 1, j, u_plus);
  }
}

namespace {

double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2 * ax)) - std::log(2.0);
}

// smooth window on x1 vanishing on the stream collar
double window(const CylinderGrid& g, double x) {
  const double le = g.L - (StreamFunction::collar + 1) * g.h1();
  if (std::abs(x) >= le) return 0.0;
  const double c = std::cos(M_PI * x / (2 * le));
  return c * c;
}

}  // namespace

StreamFunction stream_with_switch(const CylinderGrid& g, double a, double u2m, double u2p) {
  if (g.d != 2) throw std::invalid_argument("stream functions require d = 2");
  StreamFunction s;
  s.grid = g;
  s.a = a;
  s.u2_minus = u2m;
  s.u2_plus = u2p;
  s.psi.assign(g.n1 * g.np, 0.0);
  s.background.resize(g.n1);
  const double base = -g.L + log_cosh(-g.L);
  for (int i = 0; i < g.n1; ++i) {
    const double x = g.x1(i);
    s.background[i] = u2m * (x + g.L) + (u2p - u2m) * 0.5 * ((x + log_cosh(x)) - base);
  }
  return s;
}

StreamFunction stream_with_profile(const CylinderGrid& g, double a, const std::vector<double>& u2) {
  if (g.d != 2) throw std::invalid_argument("stream functions require d = 2");
  StreamFunction s;
  s.grid = g;
  s.a = a;
  s.u2_minus = u2.front();
  s.u2_plus = u2.back();
  s.psi.assign(g.n1 * g.np, 0.0);
  s.background.assign(g.n1, 0.0);
  for (int i = 1; i < g.n1; ++i) s.background[i] = s.background[i - 1] + 0.5 * g.h1() * (u2[i - 1] + u2[i]);
  return s;
}

void add_stream_noise(StreamFunction& s, std::uint64_t seed, double amplitude) {
  const auto& g = s.grid;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double le = g.L - (StreamFunction::collar + 1) * g.h1();
  std::vector<double> noise(g.n1 * g.np, 0.0);
  for (int m = 0; m < 3; ++m)
    for (int k = 1; k <= 4; ++k) {
      const double ca = gauss(rng) / k, cb = gauss(rng) / k, ph = gauss(rng);
      for (int i = 0; i < g.n1; ++i) {
        const double x = g.x1(i);
        const double ax = window(g, x) * std::cos(m * M_PI * x / le + ph);
        for (int j = 0; j < g.np; ++j) {
          const double y = j * g.hp();
          noise[i * g.np + j] += ax * (ca * std::cos(2 * M_PI * k * y) + cb * std::sin(2 * M_PI * k * y));
        }
      }
    }
  double sup = 0;
  for (int i = 1; i < g.n1 - 1; ++i)
    for (int j = 0; j < g.np; ++j) {
      const int jp = (j + 1) % g.np, jm = (j + g.np - 1) % g.np;
      const double du1 = (noise[i * g.np + jp] - noise[i * g.np + jm]) / (2 * g.hp());
      const double du2 = (noise[(i + 1) * g.np + j] - noise[(i - 1) * g.np + j]) / (2 * g.h1());
      sup = std::max(sup, std::hypot(du1, du2));
    }
  const double scale = sup > 0 ? amplitude / sup : 0.0;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.np; ++j)
      if (s.free_row(i)) s.psi[i * g.np + j] += scale * noise[i * g.np + j];
}

Field from_stream(const StreamFunction& s) {
  const auto& g = s.grid;
  Vec um(2), up(2);
  um << s.a, s.u2_minus;
  up << s.a, s.u2_plus;
  Field f(g, um, up);
  const int np = g.np;
  const double h1 = g.h1(), hp = g.hp();
  auto psi = [&](int i, int j) { return s.psi[i * np + j]; };
  for (int i = 1; i < g.n1 - 1; ++i)
    for (int j = 0; j < np; ++j) {
      const int jp = (j + 1) % np, jm = (j + np - 1) % np;
      f.at(i, j, 0) = s.a - (psi(i, jp) - psi(i, jm)) / (2 * hp);
      f.at(i, j, 1) = ((s.background[i + 1] + psi(i + 1, j)) - (s.background[i - 1] + psi(i - 1, j))) / (2 * h1);
    }
  return f;
}

double energy_gradient(const Potential& p, const Field& f, std::vector<double>& grad) {
  const auto& g = f.grid;
  const int d = g.d;
  const long np = g.n_perp();
  const double h1 = g.h1(), hp = g.hp();
  const double vp = std::pow(hp, d - 1);
  grad.assign(f.values.size(), 0.0);
  std::vector<double> row_energy(g.n1, 0.0);
  parallel_for(g.n1, [&](long il) {
    const int i = static_cast<int>(il);
    Vec z(d);
    double e = 0;
    const double wx = g.w1(i);
    for (long j = 0; j < np; ++j) {
      const double* u = &f.values[f.offset(i, j)];
      double* gr = &grad[f.offset(i, j)];
      for (int c = 0; c < d; ++c) z[c] = u[c];
      e += wx * p(z);
      Vec gw = p.grad(z);
      for (int c = 0; c < d; ++c) gr[c] += vp * wx * gw[c];
      if (i + 1 < g.n1) {
        const double* un = &f.values[f.offset(i + 1, j)];
        for (int c = 0; c < d; ++c) {
          const double df = un[c] - u[c];
          e += 0.5 * df * df / h1;
          gr[c] -= vp * df / h1;
        }
      }
      if (i > 0) {
        const double* uo = &f.values[f.offset(i - 1, j)];
        for (int c = 0; c < d; ++c) gr[c] += vp * (u[c] - uo[c]) / h1;
      }
      for (int k = 0; k < d - 1; ++k) {
        const double* un = &f.values[f.offset(i, g.shift(j, k, 1))];
        const double* uo = &f.values[f.offset(i, g.shift(j, k, -1))];
        for (int c = 0; c < d; ++c) {
          const double df = un[c] - u[c];
          e += wx * 0.5 * df * df / (hp * hp);
          gr[c] += vp * wx * (2 * u[c] - un[c] - uo[c]) / (hp * hp);
        }
      }
    }
    row_energy[i] = e * vp;
  });
  double total = 0;
  for (double e : row_energy) total += e;
  return total;
}

double energy(const Potential& p, const Field& f) {
  std::vector<double> g;
  return energy_gradient(p, f, g);
}

double divergence_max(const Field& f) {
  const auto& g = f.grid;
  const long np = g.n_perp();
  double worst = 0;
  for (int i = 1; i < g.n1 - 1; ++i)
    for (long j = 0; j < np; ++j) {
      double s = (f.at(i + 1, j, 0) - f.at(i - 1, j, 0)) / (2 * g.h1());
      for (int k = 0; k < g.d - 1; ++k)
        s += (f.at(i, g.shift(j, k, 1), k + 1) - f.at(i, g.shift(j, k, -1), k + 1)) / (2 * g.hp());
      worst = std::max(worst, std::abs(s));
    }
  return worst;
}

namespace {

Vec profile_at(const Profile1D& prof, double t) {
  if (t <= prof.t.front()) return prof.values.front();
  if (t >= prof.t.back()) return prof.values.back();
  const auto it = std::upper_bound(prof.t.begin(), prof.t.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - prof.t.begin()) - 1;
  const double th = (t - prof.t[k]) / (prof.t[k + 1] - prof.t[k]);
  return (1 - th) * prof.values[k] + th * prof.values[k + 1];
}

}  // namespace

Field embed_profile(const CylinderGrid& g, const Profile1D& prof, const Vec& u_minus,
                    const Vec& u_plus) {
  Field f(g, u_minus, u_plus);
  for (int i = 1; i < g.n1 - 1; ++i) {
    const Vec v = profile_at(prof, g.x1(i));
    for (long j = 0; j < g.n_perp(); ++j) f.set_node(i, j, v);
  }
  return f;
}

std::vector<Vec> slice_average(const Field& f) {
  const auto& g = f.grid;
  std::vector<Vec> out(g.n1, Vec::Zero(g.d));
  for (int i = 0; i < g.n1; ++i) {
    for (long j = 0; j < g.n_perp(); ++j) out[i] += f.node(i, j);
    out[i] /= static_cast<double>(g.n_perp());
  }
  return out;
}

double slice_variance(const Field& f) {
  const auto& g = f.grid;
  auto avg = slice_average(f);
  double jump = (f.u_plus - f.u_minus).squaredNorm();
  if (jump < 1e-24) jump = 1.0;
  double worst = 0;
  for (int i = 0; i < g.n1; ++i) {
    double v = 0;
    for (long j = 0; j < g.n_perp(); ++j) v += (f.node(i, j) - avg[i]).squaredNorm();
    worst = std::max(worst, v / g.n_perp());
  }
  return worst / jump;
}

Profile1D transition_profile(const Potential& p, const Vec& u_minus, const Vec& u_plus) {
  const double a = u_minus[0];
  if ((u_plus - u_minus).norm() < 1e-14) {
    Profile1D prof;
    prof.a = a;
    prof.t = {0.0};
    prof.values = {u_minus};
    prof.u_minus = u_minus;
    prof.u_plus = u_plus;
    return prof;
  }
  if (p.dim() == 2) {
    try {
      return solve_profile_ode(p, a, u_minus[1], u_plus[1]);
    } catch (const ProfileError&) {
    }
  }
  GeodesicOptions go;
  go.n_nodes = 200;
  go.refine = false;
  auto geo = geodesic_cost(p, PathSpace::slice, u_minus, u_plus, go);
  return reparametrize_equipartition(p, geo.path);
}

namespace {

// random smooth vector noise windowed away from the boundary rows
std::vector<double> smooth_noise(const CylinderGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int d = g.d;
  const long np = g.n_perp();
  const double le = g.L - (StreamFunction::collar + 1) * g.h1();
  std::vector<double> out(g.n_nodes() * d, 0.0);
  const int kmax = 2;
  for (int c = 0; c < d; ++c)
    for (int m = 0; m < 3; ++m)
      for (int trial = 0; trial < 6; ++trial) {
        std::vector<int> kv(d - 1);
        for (auto& k : kv) k = static_cast<int>(rng() % (2 * kmax + 1)) - kmax;
        const double amp = gauss(rng), ph = gauss(rng), ph1 = gauss(rng);
        for (int i = 1; i < g.n1 - 1; ++i) {
          const double x = g.x1(i);
          const double ax = window(g, x) * std::cos(m * M_PI * x / le + ph1);
          if (ax == 0) continue;
          for (long j = 0; j < np; ++j) {
            double arg = ph;
            for (int k = 0; k < d - 1; ++k) arg += 2 * M_PI * kv[k] * g.xp(j, k);
            out[(i * np + j) * d + c] += amp * ax * std::cos(arg);
          }
        }
      }
  return out;
}

double jump_scale(const Vec& um, const Vec& up) {
  const double j = (up - um).norm();
  return j > 1e-12 ? j : 1.0;
}

StreamFunction initial_stream(const Potential& p, const CylinderGrid& g, const Vec& um,
                              const Vec& up, const InitSpec& init) {
  const double a = um[0];
  StreamFunction s;
  if (init.kind == InitKind::field) {
    if (!init.field) throw std::invalid_argument("init kind 'field' without a field");
    const Field& f = *init.field;
    // integrate u2 along x1 per torus column, keep the column mean as background
    std::vector<double> total(g.n1 * g.np, 0.0);
    for (int j = 0; j < g.np; ++j)
      for (int i = 1; i < g.n1; ++i)
        total[i * g.np + j] = total[(i - 1) * g.np + j] + 0.5 * g.h1() * (f.at(i - 1, j, 1) + f.at(i, j, 1));
    std::vector<double> u2(g.n1);
    for (int i = 0; i < g.n1; ++i) {
      double m = 0;
      for (int j = 0; j < g.np; ++j) m += f.at(i, j, 1);
      u2[i] = m / g.np;
    }
    s = stream_with_profile(g, a, u2);
    s.u2_minus = um[1];
    s.u2_plus = up[1];
    for (int i = 0; i < g.n1; ++i)
      if (s.free_row(i))
        for (int j = 0; j < g.np; ++j) {
          double m = 0;
          for (int q = 0; q < g.np; ++q) m += total[i * g.np + q];
          s.psi[i * g.np + j] = total[i * g.np + j] - m / g.np;
        }
    return s;
  }
  if (init.kind == InitKind::random) {
    s = stream_with_switch(g, a, um[1], up[1]);
    add_stream_noise(s, init.seed, init.amplitude * jump_scale(um, up));
    return s;
  }
  const Profile1D prof = transition_profile(p, um, up);
  const Field base = embed_profile(g, prof, um, up);
  std::vector<double> u2(g.n1);
  for (int i = 0; i < g.n1; ++i) u2[i] = base.at(i, 0, 1);
  s = stream_with_profile(g, a, u2);
  if (init.kind == InitKind::perturbed) add_stream_noise(s, init.seed, init.amplitude * jump_scale(um, up));
  return s;
}

}  // namespace

Field initial_field(const Potential& p, const CylinderGrid& g, const Vec& um, const Vec& up,
                    const InitSpec& init) {
  if (std::abs(um[0] - up[0]) > 1e-14)
    throw std::invalid_argument("wells must share the first coordinate");
  if (g.d == 2) return from_stream(initial_stream(p, g, um, up, init));
  if (init.kind == InitKind::field) {
    if (!init.field) throw std::invalid_argument("init kind 'field' without a field");
    return project_div_free(*init.field);
  }
  Field f(g, um, up);
  if (init.kind == InitKind::random) {
    for (int i = 1; i < g.n1 - 1; ++i) {
      const double th = static_cast<double>(i) / (g.n1 - 1);
      for (long j = 0; j < g.n_perp(); ++j) f.set_node(i, j, (1 - th) * um + th * up);
    }
  } else {
    f = embed_profile(g, transition_profile(p, um, up), um, up);
  }
  if (init.kind == InitKind::perturbed || init.kind == InitKind::random) {
    Field noise(g, Vec::Zero(g.d), Vec::Zero(g.d));
    noise.values = smooth_noise(g, init.seed);
    noise = project_div_free(noise);
    double sup = 0;
    for (double v : noise.values) sup = std::max(sup, std::abs(v));
    const double scale = sup > 0 ? init.amplitude * jump_scale(um, up) / sup : 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] += scale * noise.values[k];
    f = project_div_free(f);
  }
  return f;
}

namespace {

double boundary_avg_error(const Field& f) {
  auto avg = slice_average(f);
  return std::max((avg.front() - f.u_minus).norm(), (avg.back() - f.u_plus).norm());
}

MinimizeReport finish_report(const Potential& p, const Field& f, const LbfgsResult& r) {
  MinimizeReport rep;
  rep.energy = energy(p, f);
  rep.iterations = r.iterations;
  rep.grad_norm = r.grad_norm;
  rep.slice_variance = slice_variance(f);
  rep.boundary_avg_error = boundary_avg_error(f);
  rep.divergence_max = divergence_max(f);
  rep.converged = r.converged;
  rep.stop_reason = r.stop_reason;
  return rep;
}

std::pair<Field, MinimizeReport> minimize_2d(const Potential& p, const CylinderGrid& g,
                                             const Vec& um, const Vec& up, const InitSpec& init,
                                             const MinimizeOptions& opts) {
  StreamFunction s = initial_stream(p, g, um, up, init);
  const int np = g.np;
  const int r0 = StreamFunction::collar, r1 = g.n1 - StreamFunction::collar;
  const long nfree = static_cast<long>(r1 - r0) * np;
  const double h1 = g.h1(), hp = g.hp(), vol = g.cell_volume();

  auto load = [&](const Vec& x) {
    for (int i = r0; i < r1; ++i)
      for (int j = 0; j < np; ++j) s.psi[i * np + j] = x[(i - r0) * np + j];
  };
  Vec x0(nfree);
  for (int i = r0; i < r1; ++i)
    for (int j = 0; j < np; ++j) x0[(i - r0) * np + j] = s.psi[i * np + j];

  std::vector<double> du;
  std::vector<double> dpsi(g.n1 * np);
  LbfgsProblem prob;
  prob.objective = [&](const Vec& x, Vec& gx) {
    load(x);
    Field f = from_stream(s);
    const double e = energy_gradient(p, f, du);
    std::fill(dpsi.begin(), dpsi.end(), 0.0);
    for (int i = 1; i < g.n1 - 1; ++i)
      for (int j = 0; j < np; ++j) {
        const double g1 = du[f.offset(i, j)], g2 = du[f.offset(i, j) + 1];
        const int jp = (j + 1) % np, jm = (j + np - 1) % np;
        dpsi[i * np + jp] -= g1 / (2 * hp);
        dpsi[i * np + jm] += g1 / (2 * hp);
        dpsi[(i + 1) * np + j] += g2 / (2 * h1);
        dpsi[(i - 1) * np + j] -= g2 / (2 * h1);
      }
    gx.resize(nfree);
    for (int i = r0; i < r1; ++i)
      for (int j = 0; j < np; ++j) gx[(i - r0) * np + j] = dpsi[i * np + j];
    return e;
  };
  prob.grad_norm = [vol](const Vec& gx) { return gx.size() ? gx.cwiseAbs().maxCoeff() / vol : 0.0; };
  std::vector<TraceRow> trace;
  prob.on_iter = [&](int it, double e, double gn, const Vec& x) {
    if (opts.trace_every <= 0 || it % opts.trace_every != 0) return;
    load(x);
    trace.push_back({it, e, gn, slice_variance(from_stream(s))});
  };
  {
    Vec gx;
    const double e0 = prob.objective(x0, gx);
    trace.push_back({0, e0, prob.grad_norm(gx), slice_variance(from_stream(s))});
  }
  LbfgsOptions lo;
  lo.memory = opts.memory;
  lo.max_iter = opts.max_iter;
  lo.tol = opts.tol;
  auto r = lbfgs_minimize(prob, x0, lo);
  load(r.x);
  Field f = from_stream(s);
  auto rep = finish_report(p, f, r);
  rep.trace = std::move(trace);
  return {f, rep};
}

std::pair<Field, MinimizeReport> minimize_nd(const Potential& p, const CylinderGrid& g,
                                             const Vec& um, const Vec& up, const InitSpec& init,
                                             const MinimizeOptions& opts) {
  Field f = initial_field(p, g, um, up, init);
  DivFreeProjector proj(g);
  const long row = g.n_perp() * g.d;
  const long nint = (g.n1 - 2) * row;
  const double vol = g.cell_volume();
  auto load = [&](const Vec& x) { std::copy(x.data(), x.data() + nint, f.values.begin() + row); };
  Vec x0 = Eigen::Map<const Vec>(f.values.data() + row, nint);
  std::vector<double> du;
  std::vector<double> tmp(f.values.size());
  LbfgsProblem prob;
  prob.objective = [&](const Vec& x, Vec& gx) {
    load(x);
    const double e = energy_gradient(p, f, du);
    std::fill(tmp.begin(), tmp.end(), 0.0);
    std::copy(du.begin() + row, du.begin() + row + nint, tmp.begin() + row);
    proj.apply(tmp);
    gx = Eigen::Map<const Vec>(tmp.data() + row, nint);
    return e;
  };
  prob.project = [&](Vec& x) {
    load(x);
    proj.apply(f.values);
    x = Eigen::Map<const Vec>(f.values.data() + row, nint);
  };
  prob.grad_norm = [vol](const Vec& gx) { return gx.size() ? gx.cwiseAbs().maxCoeff() / vol : 0.0; };
  std::vector<TraceRow> trace;
  prob.on_iter = [&](int it, double e, double gn, const Vec& x) {
    if (opts.trace_every <= 0 || it % opts.trace_every != 0) return;
    load(x);
    trace.push_back({it, e, gn, slice_variance(f)});
  };
  {
    Vec gx;
    const double e0 = prob.objective(x0, gx);
    trace.push_back({0, e0, prob.grad_norm(gx), slice_variance(f)});
  }
  LbfgsOptions lo;
  lo.memory = opts.memory;
  lo.max_iter = opts.max_iter;
  lo.tol = opts.tol;
  auto r = lbfgs_minimize(prob, x0, lo);
  load(r.x);
  auto rep = finish_report(p, f, r);
  rep.trace = std::move(trace);
  return {f, rep};
}

}  // namespace

std::pair<Field, MinimizeReport> minimize(const Potential& p, const CylinderGrid& g,
                                          const Vec& u_minus, const Vec& u_plus,
                                          const InitSpec& init, const MinimizeOptions& opts) {
  if (p.dim() != g.d) throw std::invalid_argument("minimize: potential and grid dimensions differ");
  if (std::abs(u_minus[0] - u_plus[0]) > 1e-14)
    throw std::invalid_argument("minimize: wells must share the first coordinate");
  if (g.d == 2) return minimize_2d(p, g, u_minus, u_plus, init, opts);
  if (g.d == 3 && g.np > 32) throw std::invalid_argument("minimize: d = 3 supports np <= 32");
  if (g.d > 3) throw std::invalid_argument("minimize: d > 3 is not supported");
  return minimize_nd(p, g, u_minus, u_plus, init, opts);
}

VResult effective_potential_V(const Potential& p, double a, const Vec& z, const TorusGrid& tg,
                              const VOptions& opts) {
  const int d = p.dim();
  if (std::abs(z[0] - a) > 1e-14) throw std::invalid_argument("effective_potential_V: z not on slice");
  const int m = tg.dims, np = tg.np;
  long N = 1;
  for (int k = 0; k < m; ++k) N *= np;
  const double h = 1.0 / np;
  const double vol = std::pow(h, m);
  auto shift = [&](long j, int k, int step) {
    long stride = 1;
    for (int q = 0; q < k; ++q) stride *= np;
    const long digit = (j / stride) % np;
    return j + ((((digit + step) % np) + np) % np - digit) * stride;
  };
  auto build = [&](const Vec& x) {
    Vec v(N * d);
    Vec mean = Vec::Zero(d);
    for (long j = 0; j < N; ++j) mean += x.segment(j * d, d);
    mean /= static_cast<double>(N);
    for (long j = 0; j < N; ++j) v.segment(j * d, d) = z + x.segment(j * d, d) - mean;
    return v;
  };
  LbfgsProblem prob;
  prob.objective = [&](const Vec& x, Vec& gx) {
    Vec v = build(x);
    double e = 0;
    Vec gv = Vec::Zero(N * d);
    for (long j = 0; j < N; ++j) {
      Vec vj = v.segment(j * d, d);
      e += p(vj);
      gv.segment(j * d, d) += p.grad(vj);
      for (int k = 0; k < m; ++k) {
        const long jn = shift(j, k, 1), jo = shift(j, k, -1);
        Vec df = v.segment(jn * d, d) - vj;
        e += 0.5 * df.squaredNorm() / (h * h);
        gv.segment(j * d, d) += (2 * vj - v.segment(jn * d, d) - v.segment(jo * d, d)) / (h * h);
      }
    }
    Vec mean = Vec::Zero(d);
    for (long j = 0; j < N; ++j) mean += gv.segment(j * d, d);
    mean /= static_cast<double>(N);
    gx.resize(N * d);
    for (long j = 0; j < N; ++j) gx.segment(j * d, d) = (gv.segment(j * d, d) - mean) * vol;
    return e * vol;
  };
  prob.grad_norm = [vol](const Vec& gx) { return gx.cwiseAbs().maxCoeff() / vol; };
  LbfgsOptions lo;
  lo.max_iter = opts.max_iter;
  lo.tol = opts.tol;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  VResult best;
  best.value = INFINITY;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    Vec x0 = Vec::Zero(N * d);
    if (r > 0) {
      // a few random low modes on the torus
      for (int mode = 0; mode < 4; ++mode) {
        std::vector<int> kv(m);
        for (auto& k : kv) k = 1 + static_cast<int>(rng() % 3);
        Vec amp(d), ph(d);
        for (int c = 0; c < d; ++c) {
          amp[c] = 0.5 * gauss(rng);
          ph[c] = gauss(rng);
        }
        for (long j = 0; j < N; ++j) {
          double arg = 0;
          long jj = j;
          for (int k = 0; k < m; ++k) {
            arg += 2 * M_PI * kv[k] * (jj % np) * h;
            jj /= np;
          }
          for (int c = 0; c < d; ++c) x0[j * d + c] += amp[c] * std::cos(arg + ph[c]);
        }
      }
    }
    auto res = lbfgs_minimize(prob, x0, lo);
    if (res.f < best.value) {
      best.value = res.f;
      best.converged = res.converged || res.stop_reason == "stalled";
      Vec v = build(res.x);
      best.v.assign(v.data(), v.data() + v.size());
    }
  }
  return best;
}

double residual_stokes(const Potential& p, const Field& f) {
  const auto& g = f.grid;
  const int d = g.d;
  const long np = g.n_perp();
  const double h1 = g.h1(), hp = g.hp();
  std::vector<double> r(f.values.size(), 0.0);
  for (int i = 1; i < g.n1 - 1; ++i)
    for (long j = 0; j < np; ++j) {
      Vec u = f.node(i, j);
      Vec lap = (f.node(i + 1, j) - 2 * u + f.node(i - 1, j)) / (h1 * h1);
      for (int k = 0; k < d - 1; ++k)
        lap += (f.node(i, g.shift(j, k, 1)) - 2 * u + f.node(i, g.shift(j, k, -1))) / (hp * hp);
      Vec ri = -lap + p.grad(u);
      for (int c = 0; c < d; ++c) r[f.offset(i, j) + c] = ri[c];
    }
  DivFreeProjector(g).apply(r);
  double s = 0;
  for (double v : r) s += v * v;
  return std::sqrt(s * g.cell_volume());
}

JinKohn jin_kohn_check(const Field& f) {
  const auto& g = f.grid;
  const int d = g.d;
  const long np = g.n_perp();
  const int corners = 1 << d;
  JinKohn out;
  Mat G(d, d);
  for (int i = 0; i + 1 < g.n1; ++i)
    for (long j = 0; j < np; ++j) {
      G.setZero();
      // corner c: bit 0 -> x1 offset, bit k+1 -> periodic direction k
      auto corner = [&](int c) {
        long jj = j;
        for (int k = 0; k < d - 1; ++k)
          if (c & (1 << (k + 1))) jj = g.shift(jj, k, 1);
        return f.node(i + (c & 1), jj);
      };
      for (int c = 0; c < corners; ++c) {
        for (int dir = 0; dir < d; ++dir) {
          if (c & (1 << dir)) continue;
          const double h = dir == 0 ? g.h1() : g.hp();
          G.col(dir) += (corner(c | (1 << dir)) - corner(c)) / h;
        }
      }
      G /= static_cast<double>(corners / 2);
      const Mat S = 0.5 * (G + G.transpose()), A = 0.5 * (G - G.transpose());
      out.sym += S.squaredNorm();
      out.asym += A.squaredNorm();
      out.full += G.squaredNorm();
    }
  const double vol = g.cell_volume();
  out.sym *= vol;
  out.asym *= vol;
  out.full *= vol;
  return out;
}

Field random_div_free_field(const Potential& p, const CylinderGrid& g, const Vec& um,
                            const Vec& up, std::uint64_t seed, double amplitude) {
  return random_div_free_field(transition_profile(p, um, up), g, um, up, seed, amplitude);
}

Field random_div_free_field(Profile1D prof, const CylinderGrid& g, const Vec& um, const Vec& up,
                            std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  // random width and position of the layer
  const double stretch = 0.5 + 1.5 * uni(rng);
  const double shift = (uni(rng) - 0.5) * 0.4 * g.L;
  for (auto& t : prof.t) t = t * stretch + shift;
  Field base = embed_profile(g, prof, um, up);
  InitSpec init;
  init.kind = InitKind::perturbed;
  init.seed = rng();
  init.amplitude = amplitude;
  if (g.d == 2) {
    std::vector<double> u2(g.n1);
    for (int i = 0; i < g.n1; ++i) u2[i] = base.at(i, 0, 1);
    StreamFunction s = stream_with_profile(g, um[0], u2);
    s.u2_minus = um[1];
    s.u2_plus = up[1];
    if (amplitude > 0) add_stream_noise(s, init.seed, amplitude * jump_scale(um, up));
    return from_stream(s);
  }
  Field f = project_div_free(base);
  if (amplitude > 0) {
    Field noise(g, Vec::Zero(g.d), Vec::Zero(g.d));
    noise.values = smooth_noise(g, init.seed);
    noise = project_div_free(noise);
    double sup = 0;
    for (double v : noise.values) sup = std::max(sup, std::abs(v));
    const double scale = sup > 0 ? amplitude * jump_scale(um, up) / sup : 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] += scale * noise.values[k];
  }
  return f;
}

}  // namespace stokes
