#pragma once

#include <functional>

namespace stokes {

// Adaptive Simpson on [a,b] to an absolute tolerance. Reversed bounds give
// the signed integral.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-9, int max_depth = 50);

// Composite Gauss-Legendre (20 nodes per panel, panels of length <= panel).
double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                      double panel = 0.5);

// Gauss-Legendre panels bisected until two halves agree with the parent, or
// the disagreement is below noise_density * panel length.
double adaptive_gauss_legendre(const std::function<double(double)>& f, double a, double b,
                               double abs_tol = 1e-10, int max_depth = 20,
                               double noise_density = 0.0);

// Uniform panels in the middle, end panels refined geometrically toward a and
// b (down to 2^-levels of a panel), each panel adaptive. Meant for integrands
// with features that shrink toward the endpoints.
double graded_integral(const std::function<double(double)>& f, double a, double b,
                       double abs_tol = 1e-9, int uniform_panels = 64, int levels = 40);

}  // namespace stokes
