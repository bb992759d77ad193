#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "stokes/metric.hpp"

namespace stokes {

MetricAudit validate_pseudo_metric(const Mat& delta, double tol) {
  MetricAudit a;
  const int n = static_cast<int>(delta.rows());
  if (delta.cols() != n) throw MetricError("distance matrix must be square");
  for (int i = 0; i < n; ++i) {
    if (std::abs(delta(i, i)) > tol) a.zero_diagonal = false;
    for (int j = 0; j < n; ++j) {
      if (std::abs(delta(i, j) - delta(j, i)) > tol) a.symmetric = false;
      if (delta(i, j) < -tol) a.nonnegative = false;
    }
  }
  a.worst_violation = -std::numeric_limits<double>::infinity();
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        if (z == x || z == y || x == y) continue;
        const double v = delta(x, y) - delta(x, z) - delta(z, y);
        if (v > a.worst_violation) {
          a.worst_violation = v;
          a.worst_triple = {x, y, z};
        }
      }
  if (n < 3) a.worst_violation = 0;
  a.triangle_ok = a.worst_violation <= tol;
  a.valid = a.symmetric && a.zero_diagonal && a.nonnegative && a.triangle_ok;
  return a;
}

Mat cut_metric(Subset Y, int n) {
  if (n < 1 || n > 31) throw MetricError("cut metric needs 1 <= n <= 31 points");
  const Subset full = (Subset{1} << n) - 1;
  if ((Y & full) == 0 || (Y & full) == full || (Y & ~full) != 0)
    throw MetricError("cut subset must be a proper nonempty subset");
  Mat m = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = (((Y >> i) ^ (Y >> j)) & 1u) ? 1.0 : 0.0;
  return m;
}

Vec nnls(const Mat& A, const Vec& b, double tol, int max_iter) {
  const int n = static_cast<int>(A.cols());
  Vec x = Vec::Zero(n);
  std::vector<bool> passive(n, false);
  Vec w = A.transpose() * (b - A * x);

  auto solve_passive = [&](Vec& s) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    Mat Ap(A.rows(), idx.size());
    for (size_t k = 0; k < idx.size(); ++k) Ap.col(k) = A.col(idx[k]);
    const Vec sp = Ap.colPivHouseholderQr().solve(b);
    s.setZero(n);
    for (size_t k = 0; k < idx.size(); ++k) s[idx[k]] = sp[k];
  };

  for (int outer = 0; outer < max_iter; ++outer) {
    int jmax = -1;
    double wmax = tol;
    for (int j = 0; j < n; ++j)
      if (!passive[j] && w[j] > wmax) {
        wmax = w[j];
        jmax = j;
      }
    if (jmax < 0) break;
    passive[jmax] = true;

    Vec s;
    for (int inner = 0; inner < max_iter; ++inner) {
      solve_passive(s);
      double alpha = 1.0;
      bool feasible = true;
      for (int j = 0; j < n; ++j)
        if (passive[j] && s[j] <= 0) {
          feasible = false;
          alpha = std::min(alpha, x[j] / (x[j] - s[j]));
        }
      if (feasible) break;
      x += alpha * (s - x);
      for (int j = 0; j < n; ++j)
        if (passive[j] && x[j] <= tol) {
          passive[j] = false;
          x[j] = 0;
        }
    }
    x = s;
    w = A.transpose() * (b - A * x);
  }
  return x;
}

CutDecomposition decompose_cuts(const Mat& delta) {
  const int n = static_cast<int>(delta.rows());
  if (n < 2 || n > 12) throw MetricError("cut decomposition supports 2..12 points");
  const auto audit = validate_pseudo_metric(delta, 1e-10);
  if (!audit.valid) throw MetricError("not a pseudo-metric");

  // columns: subsets containing x0, other than X itself
  std::vector<Subset> masks;
  const Subset full = (Subset{1} << n) - 1;
  for (Subset m = 1; m < full; m += 2) masks.push_back(m);

  const int rows = n * (n - 1) / 2;
  Mat A = Mat::Zero(rows, masks.size());
  Vec b(rows);
  int r = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++r) {
      b[r] = delta(i, j);
      for (size_t k = 0; k < masks.size(); ++k)
        A(r, k) = (((masks[k] >> i) ^ (masks[k] >> j)) & 1u) ? 1.0 : 0.0;
    }

  const Vec x = nnls(A, b);
  CutDecomposition dec;
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  for (size_t k = 0; k < masks.size(); ++k)
    if (x[k] > 1e-12 * scale) dec.weights[masks[k]] = x[k];
  dec.residual = (reconstruct(dec, n) - delta).cwiseAbs().maxCoeff();
  dec.feasible = dec.residual <= 1e-9 * scale;
  return dec;
}

Mat reconstruct(const CutDecomposition& dec, int n) {
  Mat m = Mat::Zero(n, n);
  for (const auto& [Y, lam] : dec.weights) m += lam * cut_metric(Y, n);
  return m;
}

bool is_affine_basis(const std::vector<Vec>& X, double tol) {
  if (X.empty()) return false;
  const int d = static_cast<int>(X[0].size());
  if (static_cast<int>(X.size()) != d + 1) return false;
  Mat D(d, d);
  for (int k = 0; k < d; ++k) D.col(k) = X[k + 1] - X[0];
  Eigen::JacobiSVD<Mat> svd(D);
  const auto& s = svd.singularValues();
  return s[d - 1] > tol * std::max(1.0, s[0]);
}

}  // namespace stokes
