#include "stokes/quadrature.hpp"

#include <array>
#include <cmath>

namespace stokes {

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

// Golub-Welsch would be overkill; nodes are computed once by Newton on P_n.
struct GaussTable {
  static constexpr int n = 20;
  std::array<double, n> x{}, w{};
  GaussTable() {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2 / ((1 - z * z) * dp * dp);
    }
  }
};

double gl_panel(const std::function<double(double)>& f, double lo, double hi) {
  static const GaussTable tab;
  const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
  double s = 0;
  for (int i = 0; i < GaussTable::n; ++i) s += tab.w[i] * f(c + r * tab.x[i]);
  return r * s;
}

template <class Floor>
double gl_rec(const std::function<double(double)>& f, double a, double b, double whole,
              double tol, const Floor& noise_density, int depth) {
  const double m = 0.5 * (a + b);
  const double left = gl_panel(f, a, m), right = gl_panel(f, m, b);
  // relative and absolute floors: below them the difference is rounding noise of f
  const double err = std::abs(left + right - whole);
  if (depth <= 0 || err <= tol || err <= 1e-11 * (std::abs(left) + std::abs(right)) ||
      err <= noise_density() * (b - a))
    return left + right;
  return gl_rec(f, a, m, left, tol / 2, noise_density, depth - 1) +
         gl_rec(f, m, b, right, tol / 2, noise_density, depth - 1);
}

}  // namespace

double adaptive_gauss_legendre(const std::function<double(double)>& f, double a, double b,
                               double abs_tol, int max_depth, double noise_density) {
  if (a == b) return 0.0;
  return gl_rec(f, a, b, gl_panel(f, a, b), abs_tol, [=] { return noise_density; }, max_depth);
}

double graded_integral(const std::function<double(double)>& f, double a, double b,
                       double abs_tol, int uniform_panels, int levels) {
  if (a == b) return 0.0;
  const int n = std::max(2, uniform_panels);
  const double h = (b - a) / n;
  const double tol = abs_tol / (n + 2 * levels);
  // the noise floor follows the largest |f| seen so far
  double fmax = 0;
  const std::function<double(double)> tracked = [&](double t) {
    const double v = f(t);
    fmax = std::max(fmax, std::abs(v));
    return v;
  };
  for (int k = 0; k <= 4 * n; ++k) tracked(a + (b - a) * k / (4 * n));
  auto panel = [&](double lo, double hi) {
    const double whole = gl_panel(tracked, lo, hi);
    return gl_rec(tracked, lo, hi, whole, tol, [&] { return 1e-10 * fmax; }, 20);
  };
  double total = 0;
  for (int k = 1; k < n - 1; ++k) total += panel(a + k * h, a + (k + 1) * h);
  // end panels split geometrically toward a and b
  double lo_a = a + h, hi_b = b - h;
  for (int l = 0; l < levels; ++l) {
    const double na = a + 0.5 * (lo_a - a), nb = b - 0.5 * (b - hi_b);
    total += panel(na, lo_a) + panel(hi_b, nb);
    lo_a = na;
    hi_b = nb;
  }
  total += panel(a, lo_a) + panel(hi_b, b);
  return total;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  // split into a few panels first so that symmetric integrands are not
  // mistaken for converged on the very first step
  const int panels = 8;
  double total = 0;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + (b - a) * k / panels;
    const double hi = a + (b - a) * (k + 1) / panels;
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6 * (fa + 4 * fm + fb);
    total += simpson_rec(f, lo, hi, fa, fm, fb, whole, abs_tol / panels, max_depth);
  }
  return total;
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                      double panel) {
  if (a == b) return 0.0;
  const int np = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / panel)));
  double total = 0;
  for (int k = 0; k < np; ++k)
    total += gl_panel(f, a + (b - a) * k / np, a + (b - a) * (k + 1) / np);
  return total;
}

}  // namespace stokes
