#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stokes/potential.hpp"
#include "stokes/profile.hpp"

namespace stokes {

// [-L, L] x T^{d-1}; nodes x1 = -L + i h1, x'_k = j_k / np.
struct CylinderGrid {
  int d = 2;
  double L = 10;
  int n1 = 64;
  int np = 16;

  CylinderGrid() = default;
  CylinderGrid(int d, double L, int n1, int np);

  double h1() const { return 2 * L / (n1 - 1); }
  double hp() const { return 1.0 / np; }
  long n_perp() const;
  long n_nodes() const { return n_perp() * n1; }
  double cell_volume() const;
  double x1(int i) const { return -L + i * h1(); }
  // k-th periodic coordinate (k = 0 .. d-2) of torus index j
  double xp(long j, int k) const;
  long shift(long j, int k, int step) const;
  // trapezoid weight in x1
  double w1(int i) const { return (i == 0 || i == n1 - 1) ? 0.5 * h1() : h1(); }
};

struct Field {
  CylinderGrid grid;
  std::vector<double> values;
  Vec u_minus, u_plus;

  Field() = default;
  Field(const CylinderGrid& g, const Vec& um, const Vec& up);

  long offset(int i, long j) const { return (static_cast<long>(i) * grid.n_perp() + j) * grid.d; }
  double& at(int i, long j, int c) { return values[offset(i, j) + c]; }
  double at(int i, long j, int c) const { return values[offset(i, j) + c]; }
  Vec node(int i, long j) const;
  void set_node(int i, long j, const Vec& v);
  void apply_bc();
};

struct StreamFunction {
  CylinderGrid grid;
  // perturbation part, zero on the boundary collar
  std::vector<double> psi;
  // x'-independent part; its centred x1 difference is the mean of u2
  std::vector<double> background;
  double a = 0;
  double u2_minus = -1, u2_plus = 1;

  static constexpr int collar = 3;
  bool free_row(int i) const { return i >= collar && i < grid.n1 - collar; }
};

// Background built from a smooth tanh switch between u2_minus and u2_plus.
StreamFunction stream_with_switch(const CylinderGrid& g, double a, double u2m, double u2p);
// Background whose centred difference follows the sampled values (u2 per row).
StreamFunction stream_with_profile(const CylinderGrid& g, double a, const std::vector<double>& u2);
// Adds a random smooth x'-dependent perturbation, scaled so that the induced
// velocity change has sup norm `amplitude`.
void add_stream_noise(StreamFunction& s, std::uint64_t seed, double amplitude);

Field from_stream(const StreamFunction& s);

double energy(const Potential& p, const Field& f);
// Returns the energy and fills dE/du for every node (boundary rows included).
double energy_gradient(const Potential& p, const Field& f, std::vector<double>& grad);
double divergence_max(const Field& f);

// Discrete Leray projector: removes D^T lambda with D D^T lambda = div u.
class DivFreeProjector {
 public:
  explicit DivFreeProjector(const CylinderGrid& g);
  // divergence at interior rows (i = 1 .. n1-2), row-major
  std::vector<double> divergence(const std::vector<double>& values) const;
  // projects in place; boundary rows are left untouched
  void apply(std::vector<double>& values) const;

 private:
  CylinderGrid g_;
  void solve(std::vector<double>& rhs) const;
};

Field project_div_free(const Field& f);

Field embed_profile(const CylinderGrid& g, const Profile1D& prof, const Vec& u_minus,
                    const Vec& u_plus);

std::vector<Vec> slice_average(const Field& f);
double slice_variance(const Field& f);

enum class InitKind { profile_embed, perturbed, random, field };

struct InitSpec {
  InitKind kind = InitKind::profile_embed;
  std::uint64_t seed = 1;
  // sup-norm of the velocity perturbation relative to |u+ - u-|
  double amplitude = 0.2;
  std::optional<Field> field;
};

struct TraceRow {
  int iter;
  double energy;
  double grad_norm;
  double slice_variance;
};

struct MinimizeOptions {
  double tol = 1e-6;
  int max_iter = 5000;
  int memory = 10;
  int trace_every = 1;
};

struct MinimizeReport {
  double energy = 0;
  int iterations = 0;
  double grad_norm = 0;
  double slice_variance = 0;
  double boundary_avg_error = 0;
  double divergence_max = 0;
  bool converged = false;
  std::string stop_reason;
  std::vector<TraceRow> trace;
};

// Initial 1D profile between wells on a slice (ODE in 2D, geodesic + time
// change otherwise).
Profile1D transition_profile(const Potential& p, const Vec& u_minus, const Vec& u_plus);

Field initial_field(const Potential& p, const CylinderGrid& g, const Vec& u_minus,
                    const Vec& u_plus, const InitSpec& init);

std::pair<Field, MinimizeReport> minimize(const Potential& p, const CylinderGrid& g,
                                          const Vec& u_minus, const Vec& u_plus,
                                          const InitSpec& init, const MinimizeOptions& opts = {});

struct TorusGrid {
  int dims = 1;
  int np = 16;
};

struct VOptions {
  std::uint64_t seed = 1;
  int restarts = 3;
  int max_iter = 2000;
  double tol = 1e-9;
};

struct VResult {
  double value = 0;
  bool converged = false;
  // minimizing torus map, node-major with d components per node
  std::vector<double> v;
};

VResult effective_potential_V(const Potential& p, double a, const Vec& z, const TorusGrid& tg,
                              const VOptions& opts = {});

double residual_stokes(const Potential& p, const Field& f);

struct JinKohn {
  double sym = 0;
  double asym = 0;
  double full = 0;
};
JinKohn jin_kohn_check(const Field& f);

// Random smooth divergence-free field with the given well boundary values.
Field random_div_free_field(const Potential& p, const CylinderGrid& g, const Vec& u_minus,
                            const Vec& u_plus, std::uint64_t seed, double amplitude);
// Same, reusing a precomputed transition profile.
Field random_div_free_field(Profile1D prof, const CylinderGrid& g, const Vec& u_minus,
                            const Vec& u_plus, std::uint64_t seed, double amplitude);

}  // namespace stokes
