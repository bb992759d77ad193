#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stokes/potential.hpp"

namespace stokes {

struct Path {
  std::vector<Vec> points;
  std::optional<double> constrained_slice;

  // drops consecutive duplicates
  void cleanup(double tol = 1e-14);
};

// Trapezoid length sum 0.5 (s_k + s_{k+1}) |dz_k| with s = sqrt(2W).
double path_length(const Potential& p, const Path& path);
// Same functional with Simpson sub-sampling on each polyline piece.
double path_length_accurate(const Potential& p, const Path& path, int sub = 16);

struct Profile1D {
  std::vector<double> t;
  std::vector<Vec> values;
  double a = 0;
  Vec u_minus, u_plus;
  std::string warning;
};

double geodesic_cost_2d(const Potential& p, double a, double y_minus, double y_plus);

enum class PathSpace { slice, ambient };

struct GeodesicOptions {
  int n_nodes = 64;
  int n_restarts = 5;
  std::uint64_t seed = 1;
  int max_iter = 400;
  // sine modes per normal direction
  int n_modes = 12;
  bool refine = true;
  int max_nodes = 1024;
  double refine_tol = 1e-5;
  std::vector<Path> extra_seeds;
};

struct GeodesicResult {
  double cost = 0;
  Path path;
  int n_nodes = 0;
  bool converged = false;
};

GeodesicResult geodesic_cost(const Potential& p, PathSpace space, const Vec& z_minus,
                             const Vec& z_plus, const GeodesicOptions& opts = {});

struct ProfileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Profile1D solve_profile_ode(const Potential& p, double a, double y_minus, double y_plus,
                            double dt = 1e-3);
Profile1D reparametrize_equipartition(const Potential& p, const Path& path);

struct Energy1D {
  double energy = 0;
  double tail_estimate = 0;
  bool truncated = false;
};

// Piecewise-linear profile energy: on each interval the kinetic part is
// |dz|^2 / (2 dt) and the potential part is (s_k + s_{k+1})^2 / 8 * dt.
Energy1D energy_1d_detail(const Potential& p, const Profile1D& prof);
double energy_1d(const Potential& p, const Profile1D& prof);
double equipartition_residual(const Potential& p, const Profile1D& prof);
Path profile_path(const Profile1D& prof);

struct TriangleRow {
  Vec z;
  double geod_minus_z = 0;
  double geod_z_plus = 0;
  double margin = 0;
};

struct TriangleReport {
  double geod_direct = 0;
  std::vector<TriangleRow> table;
  bool strict = true;
  double margin_tol = 1e-4;
};

TriangleReport check_triangle_strict(const Potential& p, double a, const std::vector<Vec>& wells,
                                     const Vec& u_minus, const Vec& u_plus,
                                     const GeodesicOptions& opts = {});

}  // namespace stokes
