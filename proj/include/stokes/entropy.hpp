#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "stokes/cylinder.hpp"
#include "stokes/potential.hpp"

namespace stokes {

enum class EntropyKind { strg, sym, asym, tricomi };
std::string to_string(EntropyKind k);

// Convention: jac(z)(i, j) = d phi_i / d z_j.
struct Entropy {
  int dim = 2;
  std::function<Vec(const Vec&)> phi;
  std::function<Mat(const Vec&)> jac;
  EntropyKind kind = EntropyKind::strg;
  std::string tag;
  // Tricomi coefficient; empty for the other kinds
  std::function<double(double)> f;
};

struct EntropyConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Mat traceless(const Mat& m);
Mat sym_part(const Mat& m);
Mat asym_part(const Mat& m);

struct SampleBox {
  Vec lo, hi;
  static SampleBox cube(int d, double half_width);
};

// Tensor grid with grid_n nodes per axis plus n_random uniform points.
std::vector<Vec> sample_box(const SampleBox& box, int grid_n, int n_random, std::uint64_t seed);

struct EntropyReport {
  bool criterion_ok = false;
  double max_violation = 0;
  double saturation_gap = std::numeric_limits<double>::quiet_NaN();
  EntropyKind kind = EntropyKind::strg;
  double c = 2;
  double symmetry_residual = 0;
  // max |grad Phi|^2 / W over samples with W > 1e-8 (integrability diagnostic)
  double bv_constant = 0;
  int n_samples = 0;
  Vec box_lo, box_hi;
};

// Violation max(0, |P0 grad Phi|^2 - c W) with c = 2 (strg) or 4 (sym, asym,
// tricomi); sym/asym also audit the symmetry of the traceless part.
EntropyReport check_punctual(const Entropy& e, const Potential& p, const std::vector<Vec>& samples,
                             EntropyKind kind, double tol = 1e-10);

struct SaturationReport {
  double gap = 0;
  double phi_jump = 0;
  double geod = 0;
  bool saturated = false;
  double tol = 1e-4;
};
SaturationReport check_saturation_detail(const Entropy& e, const Potential& p, double a,
                                         const Vec& u_minus, const Vec& u_plus, double tol = 1e-4);
double check_saturation(const Entropy& e, const Potential& p, double a, const Vec& u_minus,
                        const Vec& u_plus);

double calibration_value(const Entropy& e, const Field& f);

Entropy entropy_from_harmonic(const PlanarField& w);
Entropy entropy_from_wave(const PlanarField& w);
Entropy entropy_tricomi(const PlanarField& w, std::function<double(double)> f);

// Closedness audit of grad alpha = -(f d2 w, d1 w) over random rectangles in [-r, r]^2.
double loop_residual(const PlanarField& w, const std::function<double(double)>& f, int n_loops,
                     double r, std::uint64_t seed);

struct TricomiCheck {
  double lhs = 0;
  double energy = 0;
  double defect_grad = 0;
  double defect_w = 0;
  double defect_div = 0;
  double rhs = 0;
  double residual = 0;
};
TricomiCheck tricomi_identity_check(const PlanarField& w, std::function<double(double)> f,
                                    const Field& field);

using ScalarFn = std::function<double(const Vec&)>;
ScalarFn psi_d(int d);
ScalarFn psi_extend(const ScalarFn& psi_bar);
Entropy entropy_phi_d(int d);

struct PdeResidual {
  double pde_l2 = 0;
  double equipartition_l1 = 0;
  // k ||D||^2 + int (W - c |P0 grad Phi|^2); equals E - calibration up to O(h^2)
  double energy_gap_bound = 0;
};
PdeResidual pde_residual(const Entropy& e, const Potential& p, const Field& f, EntropyKind kind);

Entropy asym_rigidity_entropy(const Vec& c, const Mat& L, const Vec& phi0);

struct RigidityFit {
  int nullspace_dim = 0;
  int family_dim = 0;
  double max_fit_residual = 0;
};
// Brute-force: polynomial maps of degree <= 3 whose traceless Jacobian is
// antisymmetric at random points, regressed onto constants, homotheties and
// the quadratic family above.
RigidityFit asym_rigidity_regression(int d, std::uint64_t seed);

struct Ode3dTrajectory {
  std::vector<double> t;
  std::vector<Eigen::Vector2d> v;
  bool blew_up = false;
  // "(x,y)" of the equilibrium reached, or "undetermined"
  std::string omega_limit;
};
Ode3dTrajectory ode3d_solve(double b, const Eigen::Vector2d& v0, double t0, double t1,
                            double dt = 1e-3);

}  // namespace stokes
