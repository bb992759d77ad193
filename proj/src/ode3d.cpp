#include <cmath>
#include <sstream>

#include "stokes/entropy.hpp"

namespace stokes {

Ode3dTrajectory ode3d_solve(double b, const Eigen::Vector2d& v0, double t0, double t1, double dt) {
  if (!(b > 0)) throw std::invalid_argument("ode3d_solve: b must be positive");
  auto rhs = [b](const Eigen::Vector2d& v) {
    return Eigen::Vector2d(b * b - v[0] * v[0] - v[1] * v[1], -2.0 * v[0] * v[1]);
  };
  Ode3dTrajectory tr;
  const long steps = static_cast<long>(std::ceil(std::abs(t1 - t0) / dt));
  const double h = steps > 0 ? (t1 - t0) / steps : 0.0;
  Eigen::Vector2d v = v0;
  tr.t.push_back(t0);
  tr.v.push_back(v);
  for (long k = 0; k < steps; ++k) {
    const Eigen::Vector2d k1 = rhs(v), k2 = rhs(v + 0.5 * h * k1), k3 = rhs(v + 0.5 * h * k2),
                          k4 = rhs(v + h * k3);
    v += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    tr.t.push_back(t0 + (k + 1) * h);
    tr.v.push_back(v);
    if (!v.allFinite() || v.norm() > 1e6) {
      tr.blew_up = true;
      break;
    }
  }
  tr.omega_limit = "undetermined";
  if (!tr.blew_up) {
    const Eigen::Vector2d eq[4] = {{b, 0}, {-b, 0}, {0, b}, {0, -b}};
    for (const auto& e : eq)
      if ((v - e).norm() < 1e-6) {
        std::ostringstream s;
        s << "(" << e[0] << "," << e[1] << ")";
        tr.omega_limit = s.str();
      }
  } else {
    tr.omega_limit = "blow-up";
  }
  return tr;
}

}  // namespace stokes
