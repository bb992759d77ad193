#pragma once

#include <functional>
#include <string>

#include "stokes/types.hpp"

namespace stokes {

struct LbfgsOptions {
  int memory = 10;
  int max_iter = 1000;
  double tol = 1e-6;
  double armijo_c = 1e-4;
  int max_backtrack = 60;
  // consecutive iterations with negligible relative decrease before giving up
  int stall_window = 25;
  double stall_rel = 1e-15;
};

struct LbfgsResult {
  Vec x;
  double f = 0;
  double grad_norm = 0;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
};

struct LbfgsProblem {
  // value and gradient at x
  std::function<double(const Vec&, Vec&)> objective;
  // maps a trial point back onto the feasible set (optional)
  std::function<void(Vec&)> project;
  // norm used for the stopping test (default: max abs entry)
  std::function<double(const Vec&)> grad_norm;
  // called after every accepted step
  std::function<void(int, double, double, const Vec&)> on_iter;
};

LbfgsResult lbfgs_minimize(const LbfgsProblem& prob, Vec x0, const LbfgsOptions& opts);

}  // namespace stokes
