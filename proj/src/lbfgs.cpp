#include "stokes/lbfgs.hpp"

#include <cmath>
#include <deque>

namespace stokes {

LbfgsResult lbfgs_minimize(const LbfgsProblem& prob, Vec x, const LbfgsOptions& opts) {
  auto gnorm = [&](const Vec& g) {
    return prob.grad_norm ? prob.grad_norm(g) : (g.size() ? g.cwiseAbs().maxCoeff() : 0.0);
  };
  if (prob.project) prob.project(x);
  Vec g(x.size());
  double f = prob.objective(x, g);

  LbfgsResult res;
  std::deque<Vec> S, Y;
  std::deque<double> rho;
  int stall = 0;
  int it = 0;
  res.stop_reason = "max_iter";
  for (; it < opts.max_iter; ++it) {
    const double gn = gnorm(g);
    if (gn < opts.tol) {
      res.converged = true;
      res.stop_reason = "tol";
      break;
    }

    // two-loop recursion
    Vec q = g;
    std::vector<double> alpha(S.size());
    for (int k = static_cast<int>(S.size()) - 1; k >= 0; --k) {
      alpha[k] = rho[k] * S[k].dot(q);
      q -= alpha[k] * Y[k];
    }
    double gamma = 1.0;
    if (!S.empty()) gamma = S.back().dot(Y.back()) / Y.back().squaredNorm();
    else gamma = 1.0 / std::max(1.0, g.norm());
    Vec dir = gamma * q;
    for (std::size_t k = 0; k < S.size(); ++k) {
      const double beta = rho[k] * Y[k].dot(dir);
      dir += (alpha[k] - beta) * S[k];
    }
    dir = -dir;
    double slope = g.dot(dir);
    if (!(slope < 0)) {
      // lost descent: restart from steepest descent
      S.clear();
      Y.clear();
      rho.clear();
      dir = -g / std::max(1.0, g.norm());
      slope = g.dot(dir);
    }

    double t = 1.0;
    bool accepted = false;
    Vec xn, gn_vec(x.size());
    double fn = f;
    for (int k = 0; k < opts.max_backtrack; ++k) {
      xn = x + t * dir;
      if (prob.project) prob.project(xn);
      fn = prob.objective(xn, gn_vec);
      if (std::isfinite(fn) && fn <= f + opts.armijo_c * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.stop_reason = "line_search";
      break;
    }

    Vec s = xn - x, y = gn_vec - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      S.push_back(s);
      Y.push_back(y);
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opts.memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    const double drop = f - fn;
    x = std::move(xn);
    g = gn_vec;
    f = fn;
    if (prob.on_iter) prob.on_iter(it + 1, f, gnorm(g), x);
    if (drop <= opts.stall_rel * std::max(1.0, std::abs(f))) {
      if (++stall >= opts.stall_window) {
        res.stop_reason = "stalled";
        ++it;
        break;
      }
    } else {
      stall = 0;
    }
  }
  res.x = std::move(x);
  res.f = f;
  res.grad_norm = gnorm(g);
  res.iterations = it;
  if (res.grad_norm < opts.tol) res.converged = true;
  return res;
}

}  // namespace stokes
