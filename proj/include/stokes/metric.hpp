#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stokes/potential.hpp"
#include "stokes/profile.hpp"

namespace stokes {

// g(t) = int_0^t b / int_0^1 b with b(t) = exp(-1/(t(1-t))); returns (g, g').
std::pair<double, double> smooth_g(double t);

struct FiniteMetric {
  std::vector<Vec> points;
  Mat delta;
};

struct MetricAudit {
  bool symmetric = true;
  bool zero_diagonal = true;
  bool nonnegative = true;
  bool triangle_ok = true;
  bool valid = true;
  // (x, y, z) maximizing delta(x,y) - delta(x,z) - delta(z,y)
  std::array<int, 3> worst_triple{0, 0, 0};
  double worst_violation = 0;
};

MetricAudit validate_pseudo_metric(const Mat& delta, double tol = 1e-12);

// Subsets of X are bit masks over point indices.
using Subset = std::uint32_t;
Mat cut_metric(Subset Y, int n);

struct CutDecomposition {
  // canonical subsets (containing x0) with positive weight
  std::map<Subset, double> weights;
  bool feasible = false;
  double residual = 0;
};

CutDecomposition decompose_cuts(const Mat& delta);
Mat reconstruct(const CutDecomposition& dec, int n);

// Lawson-Hanson active set solver for min |Ax - b|, x >= 0.
Vec nnls(const Mat& A, const Vec& b, double tol = 1e-13, int max_iter = 1000);

struct MetricError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

bool is_affine_basis(const std::vector<Vec>& X, double tol = 1e-9);

class CalibrationFn {
 public:
  // lambda0 <= 0 selects the automatic shrink loop
  CalibrationFn(std::vector<Vec> X, Subset Y, double lambda0 = -1);

  double value(const Vec& z) const;
  Vec gradient(const Vec& z) const;
  double lambda0() const { return lambda0_; }
  Subset subset() const { return Y_; }
  const std::vector<Vec>& points() const { return X_; }
  bool in_Y(int i) const { return (Y_ >> i) & 1u; }

  // separation conditions for the partition of unity
  static bool separation_ok(const std::vector<Vec>& X, double lambda0);
  // 0.25 * min distance (capped at 0.5), halved until separation_ok
  static double auto_lambda0(const std::vector<Vec>& X);

  // largest sampled |grad phi| over the bounding box of X enlarged by 1
  double gradient_bound(int n_samples = 20000, std::uint64_t seed = 1) const;

 private:
  std::vector<Vec> X_;
  Subset Y_;
  double lambda0_;

  std::pair<double, Vec> transition(int i, int j, double lambda, const Vec& z) const;
  std::pair<double, Vec> partition(int i, int j, const Vec& z) const;
  std::pair<double, Vec> eval(const Vec& z) const;
};

class WeightFunction {
 public:
  explicit WeightFunction(const FiniteMetric& metric, double lambda0 = -1);

  double value(const Vec& z) const;
  double w0(const Vec& z) const;
  double w1(const Vec& z) const;
  double dist_to_graph(const Vec& z) const;
  const Potential& potential() const { return W_; }
  const CutDecomposition& decomposition() const { return dec_; }
  const std::vector<CalibrationFn>& calibrations() const { return data_->cal; }
  double lambda0() const { return data_->lambda0; }
  double rho() const { return 0.5 * data_->lambda0; }
  const FiniteMetric& metric() const { return metric_; }

  struct Data {
    std::vector<CalibrationFn> cal;
    std::vector<double> lam;
    std::vector<Vec> X;
    double lambda0 = 0;
  };

 private:
  FiniteMetric metric_;
  CutDecomposition dec_;
  std::shared_ptr<const Data> data_;
  Potential W_;
};

WeightFunction build_weight_w(const FiniteMetric& metric);

// integral of w along the straight segment x -> y
double segment_length(const WeightFunction& w, const Vec& x, const Vec& y);
double polyline_length(const WeightFunction& w, const Path& path);

struct PairAudit {
  int i = 0, j = 0;
  double delta = 0;
  double segment = 0;
  double best_perturbed = 0;
  double geodesic_search = 0;
  int defeats = 0;
};

struct OptimalityReport {
  std::vector<PairAudit> pairs;
  int trials = 0;
  bool pass = true;
};

OptimalityReport verify_segment_optimality(const WeightFunction& w, const FiniteMetric& metric,
                                           int trials, std::uint64_t seed = 1,
                                           bool geodesic_search = true);

}  // namespace stokes
