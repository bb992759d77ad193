#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stokes/types.hpp"

namespace stokes {

struct Well {
  Vec point;
  double slice_coord = 0.0;
  // false when Newton polish did not converge but the grid value was small
  bool polished = true;
};

struct RotationFrame {
  Mat R;
  Vec nu;

  static RotationFrame identity(int d);
  // Rotation by angle theta in the (z1, z2) plane, padded with identity.
  static RotationFrame planar(int d, double theta);
  // Any proper rotation with R*nu = e1.
  static RotationFrame from_normal(const Vec& nu);
  bool valid(double tol = 1e-12) const;
};

class Potential {
 public:
  using EvalFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;

  Potential() = default;
  Potential(int dim, EvalFn eval, GradFn grad, std::string tag,
            std::vector<Vec> known_wells = {}, double tol_well = 1e-10);

  // Central-difference gradient; tol_well defaults to the sampled value.
  static Potential with_fd_gradient(int dim, EvalFn eval, std::string tag,
                                    std::vector<Vec> known_wells = {},
                                    double tol_well = 1e-6);

  int dim() const { return dim_; }
  double operator()(const Vec& z) const { return eval_(z); }
  double eval(const Vec& z) const { return eval_(z); }
  Vec grad(const Vec& z) const { return grad_(z); }
  const std::string& tag() const { return tag_; }
  const std::vector<Vec>& known_wells() const { return wells_; }
  double tol_well() const { return tol_well_; }

 private:
  int dim_ = 0;
  EvalFn eval_;
  GradFn grad_;
  std::string tag_;
  std::vector<Vec> wells_;
  double tol_well_ = 1e-10;
};

// A scalar function on the plane with closed-form derivatives.
struct PlanarField {
  std::function<double(double, double)> value;
  std::function<Eigen::Vector2d(double, double)> grad;
  std::function<Eigen::Matrix2d(double, double)> hessian;
  std::string tag;

  double operator()(double z1, double z2) const { return value(z1, z2); }
};

// Bivariate polynomial sum c_k z1^i z2^j.
struct PolyTerm {
  double coeff;
  int i;
  int j;
};
PlanarField polynomial_field(std::vector<PolyTerm> terms, std::string tag = "poly");
// w o R, i.e. z -> w(R z) for a 2x2 rotation R.
PlanarField compose_rotation(const PlanarField& w, const Eigen::Matrix2d& R);

enum class WaveKind { harmonic, wave, tricomi };

Potential builtin_ginzburg_landau();
Potential builtin_w_squared(const PlanarField& w, WaveKind kind,
                            std::function<double(double)> f = nullptr,
                            double f_range = 4.0);
Potential builtin_Wd(int d);

struct SliceBox {
  // bounds for coordinates z2..zd
  Vec lo;
  Vec hi;
  static SliceBox cube(int d, double half_width);
};

struct WellSearch {
  std::vector<Well> wells;
  bool non_isolated = false;
  // diameter of the largest cluster of near-zero grid minima
  double max_cluster_diameter = 0.0;
  double grid_spacing = 0.0;
};

WellSearch find_wells_on_slice(const Potential& p, double a, const SliceBox& box, int n);

Potential rotate_potential(const Potential& p, const RotationFrame& frame);

// Builtins by tag: "gl", "wd2", "wd3", "wd4", "z1z2", "tricomi".
// JSON descriptors are handled in io.hpp.
std::optional<Potential> builtin_by_tag(const std::string& tag);

}  // namespace stokes
