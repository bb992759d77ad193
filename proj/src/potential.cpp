#include "stokes/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stokes {

RotationFrame RotationFrame::identity(int d) {
  RotationFrame f;
  f.R = Mat::Identity(d, d);
  f.nu = Vec::Unit(d, 0);
  return f;
}

RotationFrame RotationFrame::planar(int d, double theta) {
  RotationFrame f;
  f.R = Mat::Identity(d, d);
  const double c = std::cos(theta), s = std::sin(theta);
  f.R(0, 0) = c;
  f.R(0, 1) = -s;
  f.R(1, 0) = s;
  f.R(1, 1) = c;
  f.nu = f.R.transpose() * Vec::Unit(d, 0);
  return f;
}

RotationFrame RotationFrame::from_normal(const Vec& nu_in) {
  const int d = static_cast<int>(nu_in.size());
  Vec nu = nu_in.normalized();
  Vec e1 = Vec::Unit(d, 0);
  RotationFrame f;
  f.nu = nu;
  Vec v = nu - e1;
  if (v.norm() < 1e-14) {
    f.R = Mat::Identity(d, d);
    return f;
  }
  Mat H = Mat::Identity(d, d) - 2.0 * v * v.transpose() / v.squaredNorm();
  // H is a reflection; flip the last axis to get a proper rotation
  H.row(d - 1) *= -1.0;
  f.R = H;
  return f;
}

bool RotationFrame::valid(double tol) const {
  const auto d = R.rows();
  if ((R.transpose() * R - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(R.determinant() - 1.0) > tol) return false;
  if (std::abs(nu.norm() - 1.0) > tol) return false;
  return (R * nu - Vec::Unit(d, 0)).norm() <= 1e-10;
}

Potential::Potential(int dim, EvalFn eval, GradFn grad, std::string tag,
                     std::vector<Vec> known_wells, double tol_well)
    : dim_(dim),
      eval_(std::move(eval)),
      grad_(std::move(grad)),
      tag_(std::move(tag)),
      wells_(std::move(known_wells)),
      tol_well_(tol_well) {}

Potential Potential::with_fd_gradient(int dim, EvalFn eval, std::string tag,
                                      std::vector<Vec> known_wells, double tol_well) {
  auto fd = [eval, dim](const Vec& z) {
    Vec g(dim);
    Vec zp = z;
    for (int i = 0; i < dim; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(z[i]));
      zp[i] = z[i] + h;
      const double fp = eval(zp);
      zp[i] = z[i] - h;
      const double fm = eval(zp);
      zp[i] = z[i];
      g[i] = (fp - fm) / (2 * h);
    }
    return g;
  };
  return Potential(dim, eval, fd, std::move(tag), std::move(known_wells), tol_well);
}

namespace {

std::vector<Vec> circle_samples(int d, int n) {
  std::vector<Vec> out;
  for (int k = 0; k < n; ++k) {
    const double t = 2 * M_PI * k / n;
    Vec z = Vec::Zero(d);
    z[0] = std::cos(t);
    z[1] = std::sin(t);
    // exact zeros at the axis points
    if (k % (n / 4) == 0) z = z.array().round();
    out.push_back(z);
  }
  return out;
}

}  // namespace

Potential builtin_ginzburg_landau() {
  auto eval = [](const Vec& z) {
    const double s = 1.0 - z.squaredNorm();
    return 0.5 * s * s;
  };
  auto grad = [](const Vec& z) -> Vec { return -2.0 * (1.0 - z.squaredNorm()) * z; };
  return Potential(2, eval, grad, "gl", circle_samples(2, 16));
}

Potential builtin_Wd(int d) {
  if (d < 2) throw std::invalid_argument("builtin_Wd: d must be >= 2");
  auto eval = [](const Vec& z) {
    const double r2 = z.squaredNorm();
    const double p = z[0] * z[0] + z[1] * z[1];
    const double q = r2 - p;
    return 0.5 * (r2 - 1) * (r2 - 1) + 2.0 * q * p;
  };
  auto grad = [d](const Vec& z) -> Vec {
    const double r2 = z.squaredNorm();
    const double p = z[0] * z[0] + z[1] * z[1];
    const double q = r2 - p;
    Vec g(d);
    for (int i = 0; i < d; ++i) {
      const double extra = i < 2 ? 4.0 * q : 4.0 * p;
      g[i] = (2.0 * (r2 - 1) + extra) * z[i];
    }
    return g;
  };
  auto wells = circle_samples(d, 16);
  for (int k = 2; k < d; ++k) {
    wells.push_back(Vec::Unit(d, k));
    wells.push_back(-Vec::Unit(d, k));
  }
  return Potential(d, eval, grad, "wd" + std::to_string(d), wells);
}

Potential builtin_w_squared(const PlanarField& w, WaveKind kind,
                            std::function<double(double)> f, double f_range) {
  if (kind == WaveKind::tricomi) {
    if (!f) throw std::invalid_argument("tricomi potential needs f");
    for (int k = 0; k <= 1000; ++k) {
      const double s = -f_range + 2 * f_range * k / 1000.0;
      if (std::abs(f(s)) > 1.0 + 1e-12)
        throw std::invalid_argument("tricomi f violates |f| <= 1 at z1 = " + std::to_string(s));
    }
  }
  auto eval = [w](const Vec& z) {
    const double v = w(z[0], z[1]);
    return 0.5 * v * v;
  };
  auto grad = [w](const Vec& z) -> Vec {
    const double v = w(z[0], z[1]);
    Eigen::Vector2d g = w.grad(z[0], z[1]);
    return Vec(v * g);
  };
  return Potential(2, eval, grad, "w_squared(" + w.tag + ")");
}

PlanarField polynomial_field(std::vector<PolyTerm> terms, std::string tag) {
  auto pw = [](double x, int k) { return k <= 0 ? 1.0 : std::pow(x, k); };
  PlanarField w;
  w.tag = std::move(tag);
  w.value = [terms, pw](double x, double y) {
    double s = 0;
    for (const auto& t : terms) s += t.coeff * pw(x, t.i) * pw(y, t.j);
    return s;
  };
  w.grad = [terms, pw](double x, double y) {
    Eigen::Vector2d g(0, 0);
    for (const auto& t : terms) {
      if (t.i > 0) g[0] += t.coeff * t.i * pw(x, t.i - 1) * pw(y, t.j);
      if (t.j > 0) g[1] += t.coeff * t.j * pw(x, t.i) * pw(y, t.j - 1);
    }
    return g;
  };
  w.hessian = [terms, pw](double x, double y) {
    Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
    for (const auto& t : terms) {
      if (t.i > 1) H(0, 0) += t.coeff * t.i * (t.i - 1) * pw(x, t.i - 2) * pw(y, t.j);
      if (t.j > 1) H(1, 1) += t.coeff * t.j * (t.j - 1) * pw(x, t.i) * pw(y, t.j - 2);
      if (t.i > 0 && t.j > 0) {
        const double v = t.coeff * t.i * t.j * pw(x, t.i - 1) * pw(y, t.j - 1);
        H(0, 1) += v;
        H(1, 0) += v;
      }
    }
    return H;
  };
  return w;
}

PlanarField compose_rotation(const PlanarField& w, const Eigen::Matrix2d& R) {
  PlanarField out;
  out.tag = w.tag + "_rot";
  out.value = [w, R](double x, double y) {
    Eigen::Vector2d z = R * Eigen::Vector2d(x, y);
    return w(z[0], z[1]);
  };
  out.grad = [w, R](double x, double y) {
    Eigen::Vector2d z = R * Eigen::Vector2d(x, y);
    return Eigen::Vector2d(R.transpose() * w.grad(z[0], z[1]));
  };
  out.hessian = [w, R](double x, double y) {
    Eigen::Vector2d z = R * Eigen::Vector2d(x, y);
    return Eigen::Matrix2d(R.transpose() * w.hessian(z[0], z[1]) * R);
  };
  return out;
}

SliceBox SliceBox::cube(int d, double half_width) {
  return {Vec::Constant(d - 1, -half_width), Vec::Constant(d - 1, half_width)};
}

namespace {

Vec slice_grad(const Potential& p, const Vec& z) { return p.grad(z).tail(p.dim() - 1); }

Mat slice_hessian(const Potential& p, const Vec& z) {
  const int m = p.dim() - 1;
  Mat H(m, m);
  Vec zp = z;
  for (int k = 0; k < m; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(z[k + 1]));
    zp[k + 1] = z[k + 1] + h;
    Vec gp = slice_grad(p, zp);
    zp[k + 1] = z[k + 1] - h;
    Vec gm = slice_grad(p, zp);
    zp[k + 1] = z[k + 1];
    H.col(k) = (gp - gm) / (2 * h);
  }
  return 0.5 * (H + H.transpose());
}

// Damped Newton on the slice; returns true when the gradient vanished.
bool newton_polish(const Potential& p, Vec& z) {
  for (int it = 0; it < 60; ++it) {
    Vec g = slice_grad(p, z);
    const double w = p(z);
    if (g.norm() < 1e-14 || w < 1e-30) return true;
    Mat H = slice_hessian(p, z);
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    Vec ev = es.eigenvalues().cwiseAbs().cwiseMax(1e-8);
    Vec step = -es.eigenvectors() * (es.eigenvectors().transpose() * g).cwiseQuotient(ev);
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k) {
      Vec trial = z;
      trial.tail(p.dim() - 1) += t * step;
      if (p(trial) <= w) {
        z = trial;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) return slice_grad(p, z).norm() < 1e-8;
  }
  return slice_grad(p, z).norm() < 1e-8;
}

}  // namespace

WellSearch find_wells_on_slice(const Potential& p, double a, const SliceBox& box, int n) {
  const int d = p.dim();
  const int m = d - 1;
  if (n < 3) throw std::invalid_argument("find_wells_on_slice: n must be >= 3");
  Vec step = (box.hi - box.lo) / (n - 1);
  long total = 1;
  for (int k = 0; k < m; ++k) total *= n;

  auto index_of = [&](const std::vector<int>& idx) {
    long s = 0;
    for (int k = m - 1; k >= 0; --k) s = s * n + idx[k];
    return s;
  };
  auto multi = [&](long s) {
    std::vector<int> idx(m);
    for (int k = 0; k < m; ++k) {
      idx[k] = static_cast<int>(s % n);
      s /= n;
    }
    return idx;
  };
  auto point = [&](const std::vector<int>& idx) {
    Vec z(d);
    z[0] = a;
    for (int k = 0; k < m; ++k) z[k + 1] = box.lo[k] + idx[k] * step[k];
    return z;
  };

  std::vector<double> W(total);
  double wmax = 0;
  for (long s = 0; s < total; ++s) {
    W[s] = p(point(multi(s)));
    wmax = std::max(wmax, W[s]);
  }

  // neighbour offsets in {-1,0,1}^m without the origin
  std::vector<std::vector<int>> offs;
  {
    long cnt = 1;
    for (int k = 0; k < m; ++k) cnt *= 3;
    for (long c = 0; c < cnt; ++c) {
      std::vector<int> o(m);
      long r = c;
      bool zero = true;
      for (int k = 0; k < m; ++k) {
        o[k] = static_cast<int>(r % 3) - 1;
        r /= 3;
        zero = zero && o[k] == 0;
      }
      if (!zero) offs.push_back(o);
    }
  }
  auto neighbours = [&](long s) {
    std::vector<long> out;
    auto idx = multi(s);
    for (const auto& o : offs) {
      std::vector<int> j = idx;
      bool ok = true;
      for (int k = 0; k < m; ++k) {
        j[k] += o[k];
        ok = ok && j[k] >= 0 && j[k] < n;
      }
      if (ok) out.push_back(index_of(j));
    }
    return out;
  };

  std::vector<char> is_min(total, 0);
  for (long s = 0; s < total; ++s) {
    bool mn = true;
    for (long t : neighbours(s))
      if (W[t] < W[s]) {
        mn = false;
        break;
      }
    is_min[s] = mn;
  }

  // cluster adjacent minima
  std::vector<long> parent(total);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<long(long)> find = [&](long x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (long s = 0; s < total; ++s) {
    if (!is_min[s]) continue;
    for (long t : neighbours(s))
      if (is_min[t]) parent[find(s)] = find(t);
  }
  std::vector<std::vector<long>> clusters;
  {
    std::vector<long> slot(total, -1);
    for (long s = 0; s < total; ++s) {
      if (!is_min[s]) continue;
      long r = find(s);
      if (slot[r] < 0) {
        slot[r] = static_cast<long>(clusters.size());
        clusters.emplace_back();
      }
      clusters[slot[r]].push_back(s);
    }
  }

  WellSearch out;
  out.grid_spacing = step.maxCoeff();
  for (const auto& cl : clusters) {
    Vec lo = point(multi(cl[0])), hi = lo;
    long best = cl[0];
    for (long s : cl) {
      Vec z = point(multi(s));
      lo = lo.cwiseMin(z);
      hi = hi.cwiseMax(z);
      if (W[s] < W[best]) best = s;
    }
    const double diam = (hi - lo).norm();
    out.max_cluster_diameter = std::max(out.max_cluster_diameter, diam);
    if (diam > 10.0 * out.grid_spacing) {
      // a plateau of minima: only report it if it sits at the zero level
      if (W[best] <= std::max(p.tol_well(), 1e-8 * wmax)) out.non_isolated = true;
      continue;
    }
    Vec z = point(multi(best));
    const bool conv = newton_polish(p, z);
    Well w{z, a, true};
    if (p(z) <= p.tol_well()) {
      w.polished = true;
    } else if (!conv && W[best] <= 1e-3 * std::max(1.0, wmax)) {
      w.polished = false;
    } else {
      continue;
    }
    bool dup = false;
    for (const auto& e : out.wells) dup = dup || (e.point - w.point).norm() < 1e-6;
    if (!dup) out.wells.push_back(w);
  }
  std::sort(out.wells.begin(), out.wells.end(), [](const Well& x, const Well& y) {
    return std::lexicographical_compare(x.point.data(), x.point.data() + x.point.size(),
                                        y.point.data(), y.point.data() + y.point.size());
  });
  return out;
}

Potential rotate_potential(const Potential& p, const RotationFrame& frame) {
  Mat R = frame.R;
  auto base = p;
  auto eval = [base, R](const Vec& z) { return base(R * z); };
  auto grad = [base, R](const Vec& z) -> Vec { return R.transpose() * base.grad(R * z); };
  std::vector<Vec> wells;
  for (const auto& w : p.known_wells()) wells.push_back(R.transpose() * w);
  return Potential(p.dim(), eval, grad, p.tag() + "_rot", wells, p.tol_well());
}

std::optional<Potential> builtin_by_tag(const std::string& tag) {
  if (tag == "gl") return builtin_ginzburg_landau();
  if (tag.size() == 3 && tag.rfind("wd", 0) == 0 && std::isdigit(tag[2]))
    return builtin_Wd(tag[2] - '0');
  if (tag == "z1z2")
    return builtin_w_squared(polynomial_field({{1.0, 1, 1}}, "z1z2"), WaveKind::harmonic);
  if (tag == "tricomi") {
    auto w = polynomial_field({{1.0, 0, 0}, {-0.5, 2, 0}, {-1.0, 0, 2}}, "tricomi_w");
    return builtin_w_squared(w, WaveKind::tricomi, [](double) { return 0.5; });
  }
  return std::nullopt;
}

}  // namespace stokes
