#include "stokes/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "stokes/profile.hpp"

namespace stokes {

std::string to_string(EntropyKind k) {
  switch (k) {
    case EntropyKind::strg: return "strg";
    case EntropyKind::sym: return "sym";
    case EntropyKind::asym: return "asym";
    case EntropyKind::tricomi: return "tricomi";
  }
  return "?";
}

Mat traceless(const Mat& m) {
  const auto d = m.rows();
  return m - (m.trace() / static_cast<double>(d)) * Mat::Identity(d, d);
}

Mat sym_part(const Mat& m) { return 0.5 * (m + m.transpose()); }
Mat asym_part(const Mat& m) { return 0.5 * (m - m.transpose()); }

SampleBox SampleBox::cube(int d, double half_width) {
  return {Vec::Constant(d, -half_width), Vec::Constant(d, half_width)};
}

std::vector<Vec> sample_box(const SampleBox& box, int grid_n, int n_random, std::uint64_t seed) {
  const int d = static_cast<int>(box.lo.size());
  std::vector<Vec> out;
  if (grid_n >= 2) {
    long total = 1;
    for (int k = 0; k < d; ++k) total *= grid_n;
    for (long s = 0; s < total; ++s) {
      Vec z(d);
      long r = s;
      for (int k = 0; k < d; ++k) {
        z[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * (r % grid_n) / (grid_n - 1);
        r /= grid_n;
      }
      out.push_back(z);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int s = 0; s < n_random; ++s) {
    Vec z(d);
    for (int k = 0; k < d; ++k) z[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * uni(rng);
    out.push_back(z);
  }
  return out;
}

EntropyReport check_punctual(const Entropy& e, const Potential& p, const std::vector<Vec>& samples,
                             EntropyKind kind, double tol) {
  EntropyReport rep;
  rep.kind = kind;
  rep.c = kind == EntropyKind::strg ? 2.0 : 4.0;
  rep.n_samples = static_cast<int>(samples.size());
  if (!samples.empty()) {
    rep.box_lo = samples.front();
    rep.box_hi = samples.front();
  }
  for (const auto& z : samples) {
    rep.box_lo = rep.box_lo.cwiseMin(z);
    rep.box_hi = rep.box_hi.cwiseMax(z);
    const Mat J = e.jac(z);
    const Mat T = traceless(J);
    const double W = p(z);
    rep.max_violation = std::max(rep.max_violation, T.squaredNorm() - rep.c * W);
    if (kind == EntropyKind::sym)
      rep.symmetry_residual = std::max(rep.symmetry_residual, asym_part(J).cwiseAbs().maxCoeff());
    if (kind == EntropyKind::asym)
      rep.symmetry_residual = std::max(rep.symmetry_residual, sym_part(T).cwiseAbs().maxCoeff());
    if (W > 1e-8) rep.bv_constant = std::max(rep.bv_constant, J.squaredNorm() / W);
  }
  rep.max_violation = std::max(0.0, rep.max_violation);
  rep.criterion_ok = rep.max_violation <= tol && rep.symmetry_residual <= tol;
  return rep;
}

SaturationReport check_saturation_detail(const Entropy& e, const Potential& p, double a,
                                         const Vec& u_minus, const Vec& u_plus, double tol) {
  SaturationReport rep;
  rep.tol = tol;
  if ((u_plus - u_minus).norm() < 1e-14) {
    rep.saturated = true;
    return rep;
  }
  rep.phi_jump = e.phi(u_plus)[0] - e.phi(u_minus)[0];
  if (p.dim() == 2) {
    rep.geod = geodesic_cost_2d(p, a, u_minus[1], u_plus[1]);
  } else {
    GeodesicOptions go;
    go.n_nodes = 200;
    Vec zm = u_minus, zp = u_plus;
    zm[0] = zp[0] = a;
    rep.geod = geodesic_cost(p, PathSpace::slice, zm, zp, go).cost;
  }
  rep.gap = rep.geod - rep.phi_jump;
  rep.saturated = std::abs(rep.gap) <= tol;
  return rep;
}

double check_saturation(const Entropy& e, const Potential& p, double a, const Vec& u_minus,
                        const Vec& u_plus) {
  return check_saturation_detail(e, p, a, u_minus, u_plus).gap;
}

double calibration_value(const Entropy& e, const Field& f) {
  const auto& g = f.grid;
  const int d = g.d;
  const long np = g.n_perp();
  const double vp = std::pow(g.hp(), d - 1);
  std::vector<Vec> phi(g.n_nodes());
  for (int i = 0; i < g.n1; ++i)
    for (long j = 0; j < np; ++j) phi[i * np + j] = e.phi(f.node(i, j));
  double axial = 0, periodic = 0;
  for (long j = 0; j < np; ++j) {
    double col = 0;
    for (int i = 0; i + 1 < g.n1; ++i) col += phi[(i + 1) * np + j][0] - phi[i * np + j][0];
    axial += col;
  }
  for (int i = 0; i < g.n1; ++i) {
    double row = 0;
    for (long j = 0; j < np; ++j)
      for (int k = 0; k < d - 1; ++k) row += phi[i * np + g.shift(j, k, 1)][k + 1] - phi[i * np + j][k + 1];
    periodic += g.w1(i) * row / g.hp();
  }
  return vp * (axial + periodic);
}

ScalarFn psi_d(int d) {
  return [d](const Vec& z) {
    double q = 0;
    for (int k = 2; k < d; ++k) q += z[k] * z[k];
    return -z[0] * z[1] * ((z[0] * z[0] + z[1] * z[1]) / 3.0 + q - 1.0);
  };
}

ScalarFn psi_extend(const ScalarFn& psi_bar) {
  return [psi_bar](const Vec& z) {
    const auto d = z.size();
    Vec lo = z.head(d - 1), hi = z.head(d - 1);
    lo[d - 2] = z[d - 2] + z[d - 1];
    hi[d - 2] = z[d - 2] - z[d - 1];
    return 0.5 * (psi_bar(lo) + psi_bar(hi));
  };
}

Entropy entropy_phi_d(int d) {
  Entropy e;
  e.dim = d;
  e.kind = EntropyKind::sym;
  e.tag = "phi_d" + std::to_string(d);
  e.phi = [d](const Vec& z) {
    double q = 0;
    for (int k = 2; k < d; ++k) q += z[k] * z[k];
    Vec out(d);
    out[0] = -z[1] * (z[0] * z[0] + z[1] * z[1] / 3.0 + q - 1.0);
    out[1] = -z[0] * (z[0] * z[0] / 3.0 + z[1] * z[1] + q - 1.0);
    for (int k = 2; k < d; ++k) out[k] = -2.0 * z[0] * z[1] * z[k];
    return out;
  };
  e.jac = [d](const Vec& z) {
    Mat H = Mat::Constant(d, d, 0.0);
    const double diag = -2.0 * z[0] * z[1];
    for (int k = 0; k < d; ++k) H(k, k) = diag;
    H(0, 1) = H(1, 0) = 1.0 - z.squaredNorm();
    for (int k = 2; k < d; ++k) {
      H(0, k) = H(k, 0) = -2.0 * z[1] * z[k];
      H(1, k) = H(k, 1) = -2.0 * z[0] * z[k];
    }
    return H;
  };
  return e;
}

namespace {

// Nodal gradient (grad u)(c, k) = d u_c / d x_k; one-sided second order at the ends.
Mat nodal_gradient(const Field& f, int i, long j) {
  const auto& g = f.grid;
  const int d = g.d;
  Mat G(d, d);
  const double h1 = g.h1(), hp = g.hp();
  if (i == 0)
    G.col(0) = (-3 * f.node(0, j) + 4 * f.node(1, j) - f.node(2, j)) / (2 * h1);
  else if (i == g.n1 - 1)
    G.col(0) = (3 * f.node(i, j) - 4 * f.node(i - 1, j) + f.node(i - 2, j)) / (2 * h1);
  else
    G.col(0) = (f.node(i + 1, j) - f.node(i - 1, j)) / (2 * h1);
  for (int k = 0; k < d - 1; ++k)
    G.col(k + 1) = (f.node(i, g.shift(j, k, 1)) - f.node(i, g.shift(j, k, -1))) / (2 * hp);
  return G;
}

}  // namespace

PdeResidual pde_residual(const Entropy& e, const Potential& p, const Field& f, EntropyKind kind) {
  const auto& g = f.grid;
  const double vp = std::pow(g.hp(), g.d - 1);
  const double c = kind == EntropyKind::strg ? 0.5 : 0.25;
  const double k = kind == EntropyKind::strg ? 0.5 : 0.25;
  double l2 = 0, eq = 0, signed_eq = 0;
  for (int i = 0; i < g.n1; ++i)
    for (long j = 0; j < g.n_perp(); ++j) {
      const Vec u = f.node(i, j);
      const Mat G = nodal_gradient(f, i, j);
      const Mat M = traceless(e.jac(u));
      Mat D;
      switch (kind) {
        case EntropyKind::sym: D = 2 * sym_part(G) - M; break;
        case EntropyKind::asym: D = 2 * asym_part(Mat(G.transpose())) - M; break;
        default: D = G.transpose() - M; break;
      }
      const double w = g.w1(i) * vp;
      const double def = p(u) - c * M.squaredNorm();
      l2 += w * D.squaredNorm();
      eq += w * std::abs(def);
      signed_eq += w * def;
    }
  PdeResidual r;
  r.pde_l2 = std::sqrt(l2);
  r.equipartition_l1 = eq;
  r.energy_gap_bound = k * l2 + signed_eq;
  return r;
}

Entropy asym_rigidity_entropy(const Vec& c, const Mat& L, const Vec& phi0) {
  const int d = static_cast<int>(c.size());
  if (d < 3) throw std::invalid_argument("asym_rigidity_entropy: d must be >= 3");
  if ((L + L.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("asym_rigidity_entropy: L must be antisymmetric");
  Entropy e;
  e.dim = d;
  e.kind = EntropyKind::asym;
  e.tag = "asym_quadratic";
  e.phi = [c, L, phi0](const Vec& z) {
    const double cz = c.dot(z), zz = z.squaredNorm();
    return Vec(phi0 + L * z + cz * z - 0.5 * zz * c);
  };
  e.jac = [c, L, d](const Vec& z) {
    return Mat(L + z * c.transpose() - c * z.transpose() + c.dot(z) * Mat::Identity(d, d));
  };
  return e;
}

namespace {

std::vector<std::vector<int>> monomials(int d, int max_deg) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(d, 0);
  std::function<void(int, int)> rec = [&](int k, int left) {
    if (k == d) {
      out.push_back(cur);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      cur[k] = e;
      rec(k + 1, left - e);
    }
    cur[k] = 0;
  };
  rec(0, max_deg);
  return out;
}

double mono_value(const std::vector<int>& m, const Vec& z) {
  double v = 1;
  for (std::size_t k = 0; k < m.size(); ++k) v *= std::pow(z[k], m[k]);
  return v;
}

double mono_deriv(const std::vector<int>& m, const Vec& z, int j) {
  if (m[j] == 0) return 0;
  std::vector<int> r = m;
  r[j] -= 1;
  return m[j] * mono_value(r, z);
}

}  // namespace

RigidityFit asym_rigidity_regression(int d, std::uint64_t seed) {
  const auto mons = monomials(d, 3);
  const int M = static_cast<int>(mons.size());
  const int ncoef = d * M;  // coefficient of monomial m in component i at i*M + m
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  const int npts = 4 * M;
  std::vector<Eigen::RowVectorXd> rows;
  for (int s = 0; s < npts; ++s) {
    Vec z(d);
    for (int k = 0; k < d; ++k) z[k] = uni(rng);
    // symmetric off-diagonal part of the Jacobian must vanish
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(ncoef);
        for (int m = 0; m < M; ++m) {
          r[i * M + m] += mono_deriv(mons[m], z, j);
          r[j * M + m] += mono_deriv(mons[m], z, i);
        }
        rows.push_back(r);
      }
    // equal diagonal entries
    for (int i = 1; i < d; ++i) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(ncoef);
      for (int m = 0; m < M; ++m) {
        r[i * M + m] += mono_deriv(mons[m], z, i);
        r[m] -= mono_deriv(mons[m], z, 0);
      }
      rows.push_back(r);
    }
  }
  Mat A(rows.size(), ncoef);
  for (std::size_t k = 0; k < rows.size(); ++k) A.row(k) = rows[k];
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const Vec sv = svd.singularValues();
  const double cut = 1e-9 * sv[0];
  int rank = 0;
  for (int k = 0; k < sv.size(); ++k)
    if (sv[k] > cut) ++rank;
  const Mat null = svd.matrixV().rightCols(ncoef - rank);

  // family: constants, homothety, antisymmetric L, quadratic c-terms
  auto index_of = [&](std::vector<int> m) {
    for (int k = 0; k < M; ++k)
      if (mons[k] == m) return k;
    return -1;
  };
  std::vector<Vec> fam;
  std::vector<int> zero(d, 0);
  for (int i = 0; i < d; ++i) {
    Vec v = Vec::Zero(ncoef);
    v[i * M + index_of(zero)] = 1;
    fam.push_back(v);
  }
  {
    Vec v = Vec::Zero(ncoef);
    for (int i = 0; i < d; ++i) {
      auto m = zero;
      m[i] = 1;
      v[i * M + index_of(m)] = 1;
    }
    fam.push_back(v);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Vec v = Vec::Zero(ncoef);
      auto mj = zero, mi = zero;
      mj[j] = 1;
      mi[i] = 1;
      v[i * M + index_of(mj)] = 1;
      v[j * M + index_of(mi)] = -1;
      fam.push_back(v);
    }
  for (int q = 0; q < d; ++q) {
    Vec v = Vec::Zero(ncoef);
    // Phi^i = z_q z_i - delta_iq |z|^2 / 2
    for (int i = 0; i < d; ++i) {
      auto m = zero;
      m[q] += 1;
      m[i] += 1;
      v[i * M + index_of(m)] += 1;
    }
    for (int j = 0; j < d; ++j) {
      auto m = zero;
      m[j] = 2;
      v[q * M + index_of(m)] -= 0.5;
    }
    fam.push_back(v);
  }
  Mat F(ncoef, fam.size());
  for (std::size_t k = 0; k < fam.size(); ++k) F.col(k) = fam[k];
  RigidityFit fit;
  fit.nullspace_dim = static_cast<int>(null.cols());
  fit.family_dim = static_cast<int>(Eigen::FullPivLU<Mat>(F).rank());
  auto qr = F.colPivHouseholderQr();
  for (int k = 0; k < null.cols(); ++k) {
    const Vec n = null.col(k);
    const Vec coef = qr.solve(n);
    fit.max_fit_residual = std::max(fit.max_fit_residual, (F * coef - n).norm());
  }
  // family members must themselves satisfy the constraints
  for (int k = 0; k < F.cols(); ++k)
    fit.max_fit_residual = std::max(fit.max_fit_residual, (A * F.col(k)).norm() / std::max(1.0, sv[0]));
  return fit;
}

}  // namespace stokes
