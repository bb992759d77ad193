#include "stokes/profile.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "stokes/lbfgs.hpp"
#include "stokes/quadrature.hpp"

namespace stokes {

namespace {

double speed(const Potential& p, const Vec& z) { return std::sqrt(2.0 * std::max(0.0, p(z))); }

Vec speed_grad(const Potential& p, const Vec& z) {
  const double s = speed(p, z);
  if (s < 1e-150) return Vec::Zero(z.size());
  return p.grad(z) / s;
}

}  // namespace

void Path::cleanup(double tol) {
  if (points.empty()) return;
  std::vector<Vec> out{points.front()};
  for (std::size_t k = 1; k < points.size(); ++k)
    if ((points[k] - out.back()).norm() > tol) out.push_back(points[k]);
  if (out.size() == 1 && points.size() > 1) out.push_back(points.back());
  points = std::move(out);
}

double path_length(const Potential& p, const Path& path) {
  double L = 0;
  if (path.points.size() < 2) return 0;
  double s0 = speed(p, path.points[0]);
  for (std::size_t k = 0; k + 1 < path.points.size(); ++k) {
    const double s1 = speed(p, path.points[k + 1]);
    L += 0.5 * (s0 + s1) * (path.points[k + 1] - path.points[k]).norm();
    s0 = s1;
  }
  return L;
}

double path_length_accurate(const Potential& p, const Path& path, int sub) {
  if (sub % 2) ++sub;
  double L = 0;
  for (std::size_t k = 0; k + 1 < path.points.size(); ++k) {
    const Vec& a = path.points[k];
    const Vec d = path.points[k + 1] - a;
    const double len = d.norm();
    if (len == 0) continue;
    double acc = 0;
    for (int i = 0; i <= sub; ++i) {
      const double w = (i == 0 || i == sub) ? 1 : (i % 2 ? 4 : 2);
      acc += w * speed(p, a + d * (static_cast<double>(i) / sub));
    }
    L += acc * len / (3.0 * sub);
  }
  return L;
}

double geodesic_cost_2d(const Potential& p, double a, double y_minus, double y_plus) {
  if (p.dim() != 2) throw std::invalid_argument("geodesic_cost_2d requires d = 2");
  if (y_minus == y_plus) return 0.0;
  auto f = [&](double y) {
    Vec z(2);
    z << a, y;
    return speed(p, z);
  };
  return std::abs(adaptive_simpson(f, y_minus, y_plus, 1e-9));
}

namespace {

struct ModePath {
  Vec z0, chord;
  std::vector<Vec> normals;
  int modes = 0;

  int n_params() const { return modes * static_cast<int>(normals.size()); }

  std::vector<Vec> nodes(const Vec& c, int N) const {
    std::vector<Vec> pts(N + 1);
    for (int k = 0; k <= N; ++k) {
      const double s = static_cast<double>(k) / N;
      Vec z = z0 + s * chord;
      if (k > 0 && k < N)
        for (int j = 0; j < modes; ++j) {
          const double sn = std::sin((j + 1) * M_PI * s);
          for (std::size_t b = 0; b < normals.size(); ++b)
            z += c[j * normals.size() + b] * sn * normals[b];
        }
      pts[k] = z;
    }
    return pts;
  }

  // least-squares mode fit of the normal offsets of a seed path
  Vec fit(const Path& seed) const {
    Vec c = Vec::Zero(n_params());
    const int Ns = static_cast<int>(seed.points.size()) - 1;
    if (Ns < 2) return c;
    for (int j = 0; j < modes; ++j)
      for (std::size_t b = 0; b < normals.size(); ++b) {
        double acc = 0;
        for (int k = 1; k < Ns; ++k) {
          const double s = static_cast<double>(k) / Ns;
          acc += (seed.points[k] - z0 - s * chord).dot(normals[b]) * std::sin((j + 1) * M_PI * s);
        }
        c[j * normals.size() + b] = 2.0 * acc / Ns;
      }
    return c;
  }
};

double mode_objective(const Potential& p, const ModePath& mp, int N, const Vec& c, Vec& grad) {
  auto pts = mp.nodes(c, N);
  std::vector<double> s(N + 1);
  for (int k = 0; k <= N; ++k) s[k] = speed(p, pts[k]);
  double L = 0;
  std::vector<Vec> g(N + 1, Vec::Zero(pts[0].size()));
  for (int k = 0; k < N; ++k) {
    Vec d = pts[k + 1] - pts[k];
    const double len = d.norm();
    L += 0.5 * (s[k] + s[k + 1]) * len;
    if (len > 0) {
      Vec u = d / len;
      g[k] -= 0.5 * (s[k] + s[k + 1]) * u;
      g[k + 1] += 0.5 * (s[k] + s[k + 1]) * u;
    }
    const double half = 0.5 * len;
    if (k > 0) g[k] += half * speed_grad(p, pts[k]);
    if (k + 1 < N) g[k + 1] += half * speed_grad(p, pts[k + 1]);
  }
  grad = Vec::Zero(mp.n_params());
  for (int k = 1; k < N; ++k) {
    const double sk = static_cast<double>(k) / N;
    for (int j = 0; j < mp.modes; ++j) {
      const double sn = std::sin((j + 1) * M_PI * sk);
      for (std::size_t b = 0; b < mp.normals.size(); ++b)
        grad[j * mp.normals.size() + b] += sn * g[k].dot(mp.normals[b]);
    }
  }
  return L;
}

std::vector<Vec> orthonormal_complement(int d, const std::vector<Vec>& span) {
  std::vector<Vec> basis;
  for (const auto& v : span)
    if (v.norm() > 1e-14) {
      Vec u = v;
      for (const auto& b : basis) u -= u.dot(b) * b;
      if (u.norm() > 1e-12) basis.push_back(u.normalized());
    }
  const std::size_t fixed = basis.size();
  for (int i = 0; i < d; ++i) {
    Vec u = Vec::Unit(d, i);
    for (const auto& b : basis) u -= u.dot(b) * b;
    if (u.norm() > 1e-8) basis.push_back(u.normalized());
  }
  return {basis.begin() + fixed, basis.end()};
}

}  // namespace

GeodesicResult geodesic_cost(const Potential& p, PathSpace space, const Vec& z_minus,
                             const Vec& z_plus, const GeodesicOptions& opts) {
  const int d = p.dim();
  GeodesicResult res;
  if (space == PathSpace::slice) {
    if (z_minus[0] != z_plus[0])
      throw std::invalid_argument("geodesic_cost: endpoints are not on one slice");
    res.path.constrained_slice = z_minus[0];
  }
  Vec chord = z_plus - z_minus;
  if (chord.norm() < 1e-14) {
    res.path.points = {z_minus, z_plus};
    res.n_nodes = 2;
    res.converged = true;
    return res;
  }
  ModePath mp;
  mp.z0 = z_minus;
  mp.chord = chord;
  std::vector<Vec> span{chord};
  if (space == PathSpace::slice) span.insert(span.begin(), Vec::Unit(d, 0));
  mp.normals = orthonormal_complement(d, span);
  mp.modes = mp.normals.empty() ? 0 : opts.n_modes;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec> seeds{Vec::Zero(mp.n_params())};
  if (mp.n_params() > 0) {
    const double len = chord.norm();
    const double nb = static_cast<double>(mp.normals.size());
    for (int r = 1; r < opts.n_restarts; ++r) {
      Vec c = Vec::Zero(mp.n_params());
      for (std::size_t b = 0; b < mp.normals.size(); ++b) {
        c[b] = gauss(rng) * 0.5 * len / std::sqrt(nb);
        if (mp.modes > 1) c[mp.normals.size() + b] = gauss(rng) * 0.15 * len / std::sqrt(nb);
      }
      seeds.push_back(c);
    }
    for (const auto& s : opts.extra_seeds) seeds.push_back(mp.fit(s));
  }

  LbfgsOptions lo;
  lo.max_iter = opts.max_iter;
  lo.tol = 1e-9;
  int N = std::max(2, opts.n_nodes);
  auto run = [&](const Vec& c0, int n) {
    LbfgsProblem prob;
    prob.objective = [&, n](const Vec& c, Vec& g) { return mode_objective(p, mp, n, c, g); };
    return lbfgs_minimize(prob, c0, lo);
  };

  Vec best_c;
  double best = INFINITY;
  bool conv = false;
  for (const auto& c0 : seeds) {
    auto r = mp.n_params() > 0 ? run(c0, N) : LbfgsResult{};
    if (mp.n_params() == 0) {
      Vec g;
      r.x = c0;
      r.f = mode_objective(p, mp, N, c0, g);
      r.converged = true;
    }
    if (r.f < best) {
      best = r.f;
      best_c = r.x;
      conv = r.converged || r.stop_reason == "stalled";
    }
  }
  if (opts.refine) {
    while (2 * N <= opts.max_nodes) {
      const int N2 = 2 * N;
      double next;
      Vec c2 = best_c;
      if (mp.n_params() > 0) {
        auto r = run(best_c, N2);
        next = r.f;
        c2 = r.x;
        conv = r.converged || r.stop_reason == "stalled";
      } else {
        Vec g;
        next = mode_objective(p, mp, N2, best_c, g);
      }
      const double change = std::abs(next - best);
      best = next;
      best_c = c2;
      N = N2;
      if (change < opts.refine_tol) break;
    }
  }
  res.cost = best;
  res.path.points = mp.nodes(best_c, N);
  if (space == PathSpace::slice)
    for (auto& z : res.path.points) z[0] = z_minus[0];
  res.n_nodes = N + 1;
  res.converged = conv;
  return res;
}

Profile1D solve_profile_ode(const Potential& p, double a, double y_minus, double y_plus,
                            double dt) {
  if (p.dim() != 2) throw std::invalid_argument("solve_profile_ode requires d = 2");
  Profile1D prof;
  prof.a = a;
  prof.u_minus = Vec(2);
  prof.u_minus << a, y_minus;
  prof.u_plus = Vec(2);
  prof.u_plus << a, y_plus;
  auto W = [&](double y) {
    Vec z(2);
    z << a, y;
    return p(z);
  };
  if (y_minus == y_plus) {
    prof.t = {0.0};
    prof.values = {prof.u_minus};
    return prof;
  }
  const int n_check = 4000;
  for (int k = 1; k < n_check; ++k) {
    const double y = y_minus + (y_plus - y_minus) * k / n_check;
    if (W(y) <= p.tol_well())
      throw ProfileError("intermediate well: W vanishes at y = " + std::to_string(y));
  }

  const double mid = 0.5 * (y_minus + y_plus);
  // integrate towards target; returns samples excluding the start
  auto integrate = [&](double target, std::vector<double>& ys, bool& attached) {
    const double sgn = target > mid ? 1.0 : -1.0;
    auto rhs = [&](double y) { return sgn * std::sqrt(2.0 * std::max(0.0, W(y))); };
    double y = mid;
    attached = false;
    const long max_steps = 2000000;
    for (long k = 0; k < max_steps; ++k) {
      const double k1 = rhs(y), k2 = rhs(y + 0.5 * dt * k1), k3 = rhs(y + 0.5 * dt * k2),
                   k4 = rhs(y + dt * k3);
      double yn = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      if (sgn * (yn - target) >= 0 || std::abs(yn - target) < 1e-8) {
        ys.push_back(target);
        attached = true;
        return;
      }
      if (yn == y) break;
      y = yn;
      ys.push_back(y);
    }
  };
  std::vector<double> fwd, bwd;
  bool att_f, att_b;
  integrate(y_plus, fwd, att_f);
  integrate(y_minus, bwd, att_b);
  if (!att_f || !att_b) prof.warning = "profile does not attach";

  for (std::size_t k = bwd.size(); k-- > 0;) {
    prof.t.push_back(-(static_cast<double>(k) + 1) * dt);
    Vec z(2);
    z << a, bwd[k];
    prof.values.push_back(z);
  }
  prof.t.push_back(0.0);
  Vec zm(2);
  zm << a, mid;
  prof.values.push_back(zm);
  for (std::size_t k = 0; k < fwd.size(); ++k) {
    prof.t.push_back((static_cast<double>(k) + 1) * dt);
    Vec z(2);
    z << a, fwd[k];
    prof.values.push_back(z);
  }
  return prof;
}

Profile1D reparametrize_equipartition(const Potential& p, const Path& path_in) {
  Path path = path_in;
  path.cleanup();
  Profile1D prof;
  prof.a = path.points.empty() ? 0.0 : path.points.front()[0];
  prof.u_minus = path.points.front();
  prof.u_plus = path.points.back();
  const std::size_t n = path.points.size();
  if (n < 2 || (n == 2 && (path.points[1] - path.points[0]).norm() == 0.0)) {
    prof.t = {0.0};
    prof.values = {path.points.front()};
    return prof;
  }
  std::vector<double> s(n);
  for (std::size_t k = 0; k < n; ++k) {
    s[k] = speed(p, path.points[k]);
    if (k > 0 && k + 1 < n && s[k] * s[k] / 2 <= p.tol_well())
      throw ProfileError("W vanishes at an interior path node");
  }
  std::vector<double> t(n, 0.0), arc(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double len = (path.points[k + 1] - path.points[k]).norm();
    const double sb = 0.5 * (s[k] + s[k + 1]);
    if (sb <= 0) throw ProfileError("W vanishes along a path segment");
    t[k + 1] = t[k] + len / sb;
    arc[k + 1] = arc[k] + len;
  }
  // put the arc-length midpoint at t = 0
  const double half = 0.5 * arc.back();
  std::size_t k = 0;
  while (k + 2 < n && arc[k + 1] < half) ++k;
  const double th = arc[k + 1] > arc[k] ? (half - arc[k]) / (arc[k + 1] - arc[k]) : 0.0;
  const double t0 = t[k] + th * (t[k + 1] - t[k]);
  for (auto& v : t) v -= t0;
  prof.t = t;
  prof.values = path.points;
  return prof;
}

Path profile_path(const Profile1D& prof) {
  Path path;
  path.points = prof.values;
  return path;
}

Energy1D energy_1d_detail(const Potential& p, const Profile1D& prof) {
  Energy1D out;
  const std::size_t n = prof.values.size();
  double sprev = n ? speed(p, prof.values[0]) : 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dt = prof.t[k + 1] - prof.t[k];
    const double snext = speed(p, prof.values[k + 1]);
    const double len2 = (prof.values[k + 1] - prof.values[k]).squaredNorm();
    const double sb = 0.5 * (sprev + snext);
    out.energy += 0.5 * len2 / dt + 0.5 * sb * sb * dt;
    sprev = snext;
  }
  if (n > 0 && prof.u_minus.size() == prof.values[0].size()) {
    auto tail = [&](const Vec& from, const Vec& to) {
      const Vec d = to - from;
      if (d.norm() <= 1e-6) return 0.0;
      out.truncated = true;
      return d.norm() * adaptive_simpson([&](double r) { return speed(p, from + r * d); }, 0, 1,
                                         1e-10);
    };
    out.tail_estimate = tail(prof.values.front(), prof.u_minus) + tail(prof.values.back(), prof.u_plus);
  }
  return out;
}

double energy_1d(const Potential& p, const Profile1D& prof) { return energy_1d_detail(p, prof).energy; }

double equipartition_residual(const Potential& p, const Profile1D& prof) {
  double worst = 0, wmax = 0;
  const std::size_t n = prof.values.size();
  for (std::size_t k = 0; k < n; ++k) wmax = std::max(wmax, p(prof.values[k]));
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dt = prof.t[k + 1] - prof.t[k];
    const double v = (prof.values[k + 1] - prof.values[k]).norm() / dt;
    const double sb = 0.5 * (speed(p, prof.values[k]) + speed(p, prof.values[k + 1]));
    worst = std::max(worst, std::abs(0.5 * v * v - 0.5 * sb * sb));
  }
  return worst / std::max(1.0, wmax);
}

TriangleReport check_triangle_strict(const Potential& p, double a, const std::vector<Vec>& wells,
                                     const Vec& u_minus, const Vec& u_plus,
                                     const GeodesicOptions& opts) {
  TriangleReport rep;
  auto geod = [&](const Vec& x, const Vec& y) {
    Vec xs = x, ys = y;
    xs[0] = a;
    ys[0] = a;
    return geodesic_cost(p, PathSpace::slice, xs, ys, opts).cost;
  };
  rep.geod_direct = geod(u_minus, u_plus);
  for (const auto& z : wells) {
    if ((z - u_minus).norm() < 1e-9 || (z - u_plus).norm() < 1e-9) continue;
    TriangleRow row;
    row.z = z;
    row.geod_minus_z = geod(u_minus, z);
    row.geod_z_plus = geod(z, u_plus);
    row.margin = row.geod_minus_z + row.geod_z_plus - rep.geod_direct;
    if (row.margin <= rep.margin_tol) rep.strict = false;
    rep.table.push_back(row);
  }
  return rep;
}

}  // namespace stokes
