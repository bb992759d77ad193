#include <cmath>
#include <random>
#include <sstream>

#include "stokes/entropy.hpp"
#include "stokes/quadrature.hpp"

namespace stokes {

namespace {

// Entropy with traceless gradient [[0, w], [f w, 0]]; alpha and Phi come
// from axis-path integrals written as single integrals (Cauchy formula).
Entropy planar_entropy(const PlanarField& w, std::function<double(double)> f, EntropyKind kind,
                       const std::string& tag) {
  auto alpha_axis = [w, f](double x) {
    return -gauss_legendre([&](double r) { return f(r) * w.grad(r, 0.0)[1]; }, 0.0, x);
  };
  auto alpha = [w, alpha_axis](double x, double y) {
    return alpha_axis(x) - gauss_legendre([&](double t) { return w.grad(x, t)[0]; }, 0.0, y);
  };
  Entropy e;
  e.dim = 2;
  e.kind = kind;
  e.tag = tag;
  e.f = f;
  e.phi = [w, f, alpha_axis](const Vec& z) {
    const double x = z[0], y = z[1];
    Vec out(2);
    out[0] = gauss_legendre([&](double r) { return (x - r) * f(r) * w.grad(r, 0.0)[1]; }, 0.0, x) +
             gauss_legendre([&](double t) { return w(x, t); }, 0.0, y);
    out[1] = gauss_legendre([&](double s) { return f(s) * w(s, 0.0); }, 0.0, x) - y * alpha_axis(x) +
             gauss_legendre([&](double r) { return (y - r) * w.grad(x, r)[0]; }, 0.0, y);
    return out;
  };
  e.jac = [w, f, alpha](const Vec& z) {
    const double a = alpha(z[0], z[1]);
    const double v = w(z[0], z[1]);
    Mat J(2, 2);
    J << -a, v, f(z[0]) * v, -a;
    return J;
  };
  return e;
}

void audit(const PlanarField& w, const std::function<double(double)>& f, const std::string& what) {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  double pde = 0, fmax = 0;
  for (int s = 0; s < 400; ++s) {
    const double x = uni(rng), y = uni(rng);
    const Eigen::Matrix2d H = w.hessian(x, y);
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    pde = std::max(pde, std::abs(H(0, 0) - f(x) * H(1, 1)) / scale);
    fmax = std::max(fmax, std::abs(f(x)));
  }
  std::ostringstream msg;
  if (fmax > 1.0 + 1e-12) {
    msg << what << ": |f| = " << fmax << " exceeds 1";
    throw EntropyConstructionError(msg.str());
  }
  if (pde > 1e-8) {
    msg << what << ": PDE residual " << pde << " exceeds 1e-8";
    throw EntropyConstructionError(msg.str());
  }
  const double loop = loop_residual(w, f, 100, 2.0, 777);
  if (loop > 1e-8) {
    msg << what << ": loop residual " << loop << " exceeds 1e-8";
    throw EntropyConstructionError(msg.str());
  }
}

}  // namespace

double loop_residual(const PlanarField& w, const std::function<double(double)>& f, int n_loops,
                     double r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-r, r);
  // the 1-form d alpha = -(f(z1) d2 w) dz1 - (d1 w) dz2
  auto ga = [&](double x, double y) {
    const Eigen::Vector2d gw = w.grad(x, y);
    return Eigen::Vector2d(-f(x) * gw[1], -gw[0]);
  };
  double worst = 0;
  for (int k = 0; k < n_loops; ++k) {
    double x0 = uni(rng), x1 = uni(rng), y0 = uni(rng), y1 = uni(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    const double s = gauss_legendre([&](double x) { return ga(x, y0)[0]; }, x0, x1) +
                     gauss_legendre([&](double y) { return ga(x1, y)[1]; }, y0, y1) -
                     gauss_legendre([&](double x) { return ga(x, y1)[0]; }, x0, x1) -
                     gauss_legendre([&](double y) { return ga(x0, y)[1]; }, y0, y1);
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

Entropy entropy_from_harmonic(const PlanarField& w) {
  auto f = [](double) { return -1.0; };
  Entropy e = planar_entropy(w, f, EntropyKind::asym, "harmonic(" + w.tag + ")");
  audit(w, f, "harmonic");
  return e;
}

Entropy entropy_from_wave(const PlanarField& w) {
  auto f = [](double) { return 1.0; };
  Entropy e = planar_entropy(w, f, EntropyKind::sym, "wave(" + w.tag + ")");
  audit(w, f, "wave");
  return e;
}

Entropy entropy_tricomi(const PlanarField& w, std::function<double(double)> f) {
  if (!f) throw EntropyConstructionError("tricomi: f missing");
  Entropy e = planar_entropy(w, f, EntropyKind::tricomi, "tricomi(" + w.tag + ")");
  audit(w, f, "tricomi");
  return e;
}

TricomiCheck tricomi_identity_check(const PlanarField& w, std::function<double(double)> f,
                                    const Field& field) {
  if (field.grid.d != 2) throw std::invalid_argument("tricomi_identity_check requires d = 2");
  const Entropy e = entropy_tricomi(w, f);
  const auto& g = field.grid;
  const double h1 = g.h1(), hp = g.hp();
  TricomiCheck out;
  out.lhs = e.phi(field.u_plus)[0] - e.phi(field.u_minus)[0];
  for (int i = 0; i < g.n1; ++i)
    for (long j = 0; j < g.n_perp(); ++j) {
      Eigen::Matrix2d G;
      if (i == 0)
        G.col(0) = (-3 * field.node(0, j) + 4 * field.node(1, j) - field.node(2, j)) / (2 * h1);
      else if (i == g.n1 - 1)
        G.col(0) = (3 * field.node(i, j) - 4 * field.node(i - 1, j) + field.node(i - 2, j)) / (2 * h1);
      else
        G.col(0) = (field.node(i + 1, j) - field.node(i - 1, j)) / (2 * h1);
      G.col(1) = (field.node(i, g.shift(j, 0, 1)) - field.node(i, g.shift(j, 0, -1))) / (2 * hp);
      const Vec u = field.node(i, j);
      const double fu = f(u[0]);
      const double wu = w(u[0], u[1]);
      const double wt = g.w1(i) * hp;
      out.energy += wt * 0.5 * (G.squaredNorm() + wu * wu);
      out.defect_grad += wt * 0.5 * (1 - fu * fu) * G.row(0).squaredNorm();
      const double t1 = wu - (fu * G(0, 1) + G(1, 0));
      out.defect_w += wt * 0.5 * t1 * t1;
      const double t2 = G(1, 1) - fu * G(0, 0);
      out.defect_div += wt * 0.5 * t2 * t2;
    }
  out.rhs = out.energy - out.defect_grad - out.defect_w - out.defect_div;
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

}  // namespace stokes
