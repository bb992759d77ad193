#include <array>
#include <cmath>
#include <vector>

#include "stokes/metric.hpp"
#include "stokes/quadrature.hpp"

namespace stokes {

namespace {

double bump(double t) { return (t <= 0 || t >= 1) ? 0.0 : std::exp(-1.0 / (t * (1 - t))); }

double bump_prime(double t) {
  if (t <= 0 || t >= 1) return 0.0;
  const double q = t * (1 - t);
  return bump(t) * (1 - 2 * t) / (q * q);
}

// Values and two derivatives on [0, 1/2]; quintic Hermite in between.
struct GTable {
  static constexpr int n = 4096;
  std::vector<double> g, d1, d2;
  double Z = 0;
  double h = 0.5 / n;

  GTable() : g(n + 1), d1(n + 1), d2(n + 1) {
    std::vector<double> cell(n);
    for (int k = 0; k < n; ++k) cell[k] = gauss_legendre(bump, k * h, (k + 1) * h, h);
    double half = 0;
    for (double c : cell) half += c;
    Z = 2 * half;
    double acc = 0;
    for (int k = 0; k <= n; ++k) {
      if (k > 0) acc += cell[k - 1];
      g[k] = acc / Z;
      d1[k] = bump(k * h) / Z;
      d2[k] = bump_prime(k * h) / Z;
    }
    g[n] = 0.5;
  }

  double eval(double t) const {
    const int k = std::min(n - 1, static_cast<int>(t / h));
    const double s = (t - k * h) / h;
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    const double h00 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
    const double h10 = s - 6 * s3 + 8 * s4 - 3 * s5;
    const double h20 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5);
    const double h01 = 10 * s3 - 15 * s4 + 6 * s5;
    const double h11 = -4 * s3 + 7 * s4 - 3 * s5;
    const double h21 = 0.5 * (s3 - 2 * s4 + s5);
    return h00 * g[k] + h10 * h * d1[k] + h20 * h * h * d2[k] + h01 * g[k + 1] +
           h11 * h * d1[k + 1] + h21 * h * h * d2[k + 1];
  }
};

const GTable& table() {
  static const GTable t;
  return t;
}

}  // namespace

std::pair<double, double> smooth_g(double t) {
  if (t <= 0) return {0.0, 0.0};
  if (t >= 1) return {1.0, 0.0};
  const auto& tab = table();
  const double d = bump(t) / tab.Z;
  if (t <= 0.5) return {tab.eval(t), d};
  return {1.0 - tab.eval(1.0 - t), d};
}

}  // namespace stokes
