#include <algorithm>
#include <cmath>
#include <random>

#include "stokes/metric.hpp"
#include "stokes/parallel.hpp"
#include "stokes/profile.hpp"
#include "stokes/quadrature.hpp"

namespace stokes {

namespace {

double point_segment_dist(const Vec& z, const Vec& a, const Vec& b) {
  const Vec ab = b - a;
  const double t = std::clamp((z - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (z - a - t * ab).norm();
}

double segment_segment_dist(const Vec& p1, const Vec& q1, const Vec& p2, const Vec& q2) {
  const Vec d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  const double c = d1.dot(r), b = d1.dot(d2);
  const double denom = a * e - b * b;
  double s = denom > 1e-14 * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
  double t = (b * s + f) / e;
  if (t < 0) {
    t = 0;
    s = std::clamp(-c / a, 0.0, 1.0);
  } else if (t > 1) {
    t = 1;
    s = std::clamp((b - c) / a, 0.0, 1.0);
  }
  return (p1 + s * d1 - p2 - t * d2).norm();
}

double min_pair_distance(const std::vector<Vec>& X) {
  double m = INFINITY;
  for (size_t i = 0; i < X.size(); ++i)
    for (size_t j = i + 1; j < X.size(); ++j) m = std::min(m, (X[i] - X[j]).norm());
  return m;
}

}  // namespace

bool CalibrationFn::separation_ok(const std::vector<Vec>& X, double lambda0) {
  const int n = static_cast<int>(X.size());
  if (!(lambda0 > 0 && lambda0 < 1)) return false;
  if (2 * lambda0 >= min_pair_distance(X)) return false;
  const double theta0 = std::acos(1 - lambda0);
  const double half_width = 0.5 * std::tan(theta0);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        if (j == i || k == i) continue;
        const Vec u = X[j] - X[i], v = X[k] - X[i];
        const double ang = std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
        if (ang <= 2 * theta0) return false;
      }

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double rij = (X[j] - X[i]).norm();
      for (int k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        if (point_segment_dist(X[k], X[i], X[j]) <= lambda0 + half_width * rij) return false;
      }
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          if (k == i || k == j || l == i || l == j) continue;
          if (k < i || (k == i && l <= j)) continue;
          const double rkl = (X[l] - X[k]).norm();
          if (segment_segment_dist(X[i], X[j], X[k], X[l]) <= half_width * (rij + rkl))
            return false;
        }
    }
  return true;
}

double CalibrationFn::auto_lambda0(const std::vector<Vec>& X) {
  double lam = std::min(0.25 * min_pair_distance(X), 0.5);
  for (int k = 0; k <= 20; ++k, lam *= 0.5)
    if (separation_ok(X, lam)) return lam;
  throw MetricError("lambda0 search failed: no separating lambda0 after 20 halvings");
}

CalibrationFn::CalibrationFn(std::vector<Vec> X, Subset Y, double lambda0)
    : X_(std::move(X)), Y_(Y), lambda0_(lambda0) {
  if (!is_affine_basis(X_)) throw MetricError("X must be an affine basis");
  const int n = static_cast<int>(X_.size());
  const Subset full = (Subset{1} << n) - 1;
  if (Y_ == 0 || (Y_ & full) == full || (Y_ & ~full) != 0)
    throw MetricError("Y must be a proper nonempty subset of X");
  if (lambda0_ <= 0)
    lambda0_ = auto_lambda0(X_);
  else if (!separation_ok(X_, lambda0_))
    throw MetricError("lambda0 too large for the separation conditions");
}

std::pair<double, Vec> CalibrationFn::transition(int i, int j, double lambda, const Vec& z) const {
  const int d = static_cast<int>(z.size());
  const Vec dz = z - X_[i];
  const double rho = dz.norm();
  if (rho == 0) return {0.0, Vec::Zero(d)};
  const Vec e = (X_[j] - X_[i]).normalized();
  const double p = dz.dot(e);
  const auto [A, dA] = smooth_g(p / lambda);
  if (A == 0 && dA == 0) return {0.0, Vec::Zero(d)};
  const double c = 1 - (rho - p) / (lambda0_ * rho);
  const auto [B, dB] = smooth_g(c);
  const Vec grad_c = (e / rho - p * dz / (rho * rho * rho)) / lambda0_;
  return {A * B, (dA / lambda) * B * e + A * dB * grad_c};
}

std::pair<double, Vec> CalibrationFn::partition(int i, int j, const Vec& z) const {
  if (i != j) {
    const auto [a, ga] = transition(i, j, lambda0_, z);
    if (a == 0 && ga.isZero()) return {0.0, Vec::Zero(z.size())};
    const auto [b, gb] = transition(j, i, lambda0_, z);
    return {a * b, ga * b + a * gb};
  }
  const Vec dz = z - X_[i];
  const double rho = dz.norm();
  const auto [G, dG] = smooth_g(1 - rho / lambda0_);
  if (rho == 0) return {G, Vec::Zero(z.size())};
  return {G, -dG / lambda0_ * dz / rho};
}

std::pair<double, Vec> CalibrationFn::eval(const Vec& z) const {
  const int n = static_cast<int>(X_.size());
  double val = 0;
  Vec grad = Vec::Zero(z.size());
  for (int i = 0; i < n; ++i) {
    if (!in_Y(i)) continue;
    const auto [xii, gxii] = partition(i, i, z);
    for (int j = 0; j < n; ++j) {
      if (in_Y(j)) continue;
      const double r = (X_[j] - X_[i]).norm();
      const auto [xij, gxij] = partition(i, j, z);
      const auto [xjj, gxjj] = partition(j, j, z);
      if (xij + xii + xjj == 0 && gxij.isZero() && gxii.isZero() && gxjj.isZero()) continue;
      const auto [gij, ggij] = transition(i, j, r, z);
      const auto [gji, ggji] = transition(j, i, r, z);
      val += (xij + xii) * gij - xjj * gji;
      grad += (gxij + gxii) * gij + (xij + xii) * ggij - gxjj * gji - xjj * ggji;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (in_Y(i)) continue;
    for (int j = i; j < n; ++j) {
      if (in_Y(j)) continue;
      const auto [x, gx] = partition(i, j, z);
      val += x;
      grad += gx;
    }
  }
  return {val, grad};
}

double CalibrationFn::value(const Vec& z) const { return eval(z).first; }
Vec CalibrationFn::gradient(const Vec& z) const { return eval(z).second; }

double CalibrationFn::gradient_bound(int n_samples, std::uint64_t seed) const {
  const int d = static_cast<int>(X_[0].size());
  Vec lo = X_[0], hi = X_[0];
  for (const auto& x : X_) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  lo.array() -= 1.0;
  hi.array() += 1.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double best = 0;
  Vec z(d);
  for (int s = 0; s < n_samples; ++s) {
    // alternate box samples with points near a random segment
    if (s % 2 == 0) {
      for (int k = 0; k < d; ++k) z[k] = lo[k] + U(rng) * (hi[k] - lo[k]);
    } else {
      const int n = static_cast<int>(X_.size());
      const int i = static_cast<int>(U(rng) * n) % n;
      const int j = (i + 1 + static_cast<int>(U(rng) * (n - 1)) % (n - 1)) % n;
      const double t = U(rng);
      z = X_[i] + t * (X_[j] - X_[i]);
      for (int k = 0; k < d; ++k) z[k] += (U(rng) - 0.5) * 2 * lambda0_;
    }
    best = std::max(best, gradient(z).norm());
  }
  return best;
}

namespace {

double graph_distance(const std::vector<Vec>& X, const Vec& z) {
  double m = INFINITY;
  for (size_t i = 0; i < X.size(); ++i)
    for (size_t j = i + 1; j < X.size(); ++j) m = std::min(m, point_segment_dist(z, X[i], X[j]));
  return m;
}

double eval_w0(const WeightFunction::Data& D, const Vec& z) {
  double s = 0;
  for (size_t k = 0; k < D.cal.size(); ++k) s += D.lam[k] * D.cal[k].gradient(z).norm();
  return s;
}

double eval_w1(const WeightFunction::Data& D, const Vec& z) {
  return std::sqrt(2.0) * smooth_g(graph_distance(D.X, z) / (0.5 * D.lambda0)).first;
}

}  // namespace

WeightFunction::WeightFunction(const FiniteMetric& metric, double lambda0) : metric_(metric) {
  const auto& X = metric_.points;
  const int n = static_cast<int>(X.size());
  if (!is_affine_basis(X)) throw MetricError("X must be an affine basis");
  if (metric_.delta.rows() != n || metric_.delta.cols() != n)
    throw MetricError("distance matrix size does not match the point count");
  dec_ = decompose_cuts(metric_.delta);
  if (!dec_.feasible) throw MetricError("cut decomposition infeasible");

  auto data = std::make_shared<Data>();
  data->X = X;
  data->lambda0 = lambda0 > 0 ? lambda0 : CalibrationFn::auto_lambda0(X);
  for (const auto& [Y, lam] : dec_.weights) {
    data->cal.emplace_back(X, Y, data->lambda0);
    data->lam.push_back(lam);
  }
  data_ = data;

  const int d = static_cast<int>(X[0].size());
  W_ = Potential::with_fd_gradient(
      d,
      [data](const Vec& z) {
        const double w = eval_w0(*data, z) + eval_w1(*data, z);
        return 0.5 * w * w;
      },
      "metric_weight", X, 1e-12);
}

double WeightFunction::w0(const Vec& z) const { return eval_w0(*data_, z); }
double WeightFunction::w1(const Vec& z) const { return eval_w1(*data_, z); }
double WeightFunction::value(const Vec& z) const { return w0(z) + w1(z); }
double WeightFunction::dist_to_graph(const Vec& z) const { return graph_distance(data_->X, z); }

WeightFunction build_weight_w(const FiniteMetric& metric) { return WeightFunction(metric); }

double segment_length(const WeightFunction& w, const Vec& x, const Vec& y) {
  const double len = (y - x).norm();
  return len * graded_integral([&](double t) { return w.value(x + t * (y - x)); }, 0.0, 1.0,
                               1e-11);
}

double polyline_length(const WeightFunction& w, const Path& path) {
  double total = 0;
  for (size_t k = 0; k + 1 < path.points.size(); ++k) {
    const Vec& x = path.points[k];
    const Vec& y = path.points[k + 1];
    const double len = (y - x).norm();
    if (len == 0) continue;
    total += len * graded_integral([&](double t) { return w.value(x + t * (y - x)); }, 0.0, 1.0,
                                   1e-8 / path.points.size(), 16, 40);
  }
  return total;
}

OptimalityReport verify_segment_optimality(const WeightFunction& w, const FiniteMetric& metric,
                                           int trials, std::uint64_t seed,
                                           bool geodesic_search) {
  const auto& X = metric.points;
  const int n = static_cast<int>(X.size());
  const int d = static_cast<int>(X[0].size());
  OptimalityReport rep;
  rep.trials = trials;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      PairAudit a;
      a.i = i;
      a.j = j;
      a.delta = metric.delta(i, j);
      rep.pairs.push_back(a);
    }

  parallel_for(static_cast<int>(rep.pairs.size()), [&](int k) {
    auto& a = rep.pairs[k];
    const Vec& x = X[a.i];
    const Vec& y = X[a.j];
    const Vec chord = y - x;
    const double r = chord.norm();
    a.segment = segment_length(w, x, y);

    std::mt19937_64 rng(seed + 7919 * static_cast<std::uint64_t>(k));
    std::normal_distribution<double> N01(0.0, 1.0);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    a.best_perturbed = INFINITY;
    for (int t = 0; t < trials; ++t) {
      // half the trials stay close to the segment, half bend far away
      const double scale = (t % 2 == 0) ? r * std::pow(10.0, -3 + 2 * U(rng)) : 0.5 * r * U(rng);
      std::vector<Vec> v;
      std::vector<double> amp;
      for (int m = 1; m <= 3; ++m) {
        Vec dir(d);
        for (int c = 0; c < d; ++c) dir[c] = N01(rng);
        v.push_back(dir.normalized());
        amp.push_back(scale * U(rng) / m);
      }
      auto speed = [&](double s) {
        Vec g = x + s * chord, dg = chord;
        for (int m = 1; m <= 3; ++m) {
          g += amp[m - 1] * std::sin(m * M_PI * s) * v[m - 1];
          dg += amp[m - 1] * m * M_PI * std::cos(m * M_PI * s) * v[m - 1];
        }
        return w.value(g) * dg.norm();
      };
      const double L = graded_integral(speed, 0.0, 1.0, 1e-8);
      a.best_perturbed = std::min(a.best_perturbed, L);
      if (L < a.delta - 1e-6) ++a.defeats;
    }

    if (geodesic_search) {
      GeodesicOptions go;
      go.n_nodes = 32;
      go.n_restarts = 3;
      go.max_iter = 200;
      go.n_modes = 6;
      go.refine = false;
      go.seed = seed + k;
      Path seg;
      for (int s = 0; s <= 32; ++s) seg.points.push_back(x + (s / 32.0) * chord);
      go.extra_seeds.push_back(seg);
      const auto g = geodesic_cost(w.potential(), PathSpace::ambient, x, y, go);
      a.geodesic_search = polyline_length(w, g.path);
      if (a.geodesic_search < a.segment - 1e-5) ++a.defeats;
    } else {
      a.geodesic_search = a.segment;
    }
  });

  for (const auto& a : rep.pairs)
    if (a.defeats > 0 || std::abs(a.segment - a.delta) > 1e-6) rep.pass = false;
  return rep;
}

}  // namespace stokes
