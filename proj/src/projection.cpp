#include <complex>
#include <stdexcept>
#include <unsupported/Eigen/FFT>

#include "stokes/cylinder.hpp"

namespace stokes {

using cplx = std::complex<double>;

DivFreeProjector::DivFreeProjector(const CylinderGrid& g) : g_(g) {
  if (g.n1 % 2 != 0) throw std::invalid_argument("projector needs an even number of axial nodes");
  if (g.d > 3) throw std::invalid_argument("projector supports d <= 3");
}

std::vector<double> DivFreeProjector::divergence(const std::vector<double>& u) const {
  const int d = g_.d;
  const long np = g_.n_perp();
  const double h1 = g_.h1(), hp = g_.hp();
  std::vector<double> div((g_.n1 - 2) * np);
  for (int i = 1; i < g_.n1 - 1; ++i)
    for (long j = 0; j < np; ++j) {
      auto at = [&](int ii, long jj, int c) { return u[(ii * np + jj) * d + c]; };
      double s = (at(i + 1, j, 0) - at(i - 1, j, 0)) / (2 * h1);
      for (int k = 0; k < d - 1; ++k)
        s += (at(i, g_.shift(j, k, 1), k + 1) - at(i, g_.shift(j, k, -1), k + 1)) / (2 * hp);
      div[(i - 1) * np + j] = s;
    }
  return div;
}

void DivFreeProjector::solve(std::vector<double>& rhs) const {
  const int rows = g_.n1 - 2;
  const int np = g_.np;
  const long nperp = g_.n_perp();
  const double h1 = g_.h1(), hp = g_.hp();
  Eigen::FFT<double> fft;

  // forward transform of each row over the torus
  std::vector<cplx> spec(static_cast<std::size_t>(rows) * nperp);
  std::vector<cplx> buf_in(np), buf_out(np);
  for (int r = 0; r < rows; ++r) {
    cplx* row = &spec[static_cast<std::size_t>(r) * nperp];
    for (long j = 0; j < nperp; ++j) row[j] = rhs[r * nperp + j];
    if (g_.d == 2) {
      buf_in.assign(row, row + np);
      fft.fwd(buf_out, buf_in);
      std::copy(buf_out.begin(), buf_out.end(), row);
    } else {
      // index j = j0 + np * j1
      for (int j1 = 0; j1 < np; ++j1) {
        for (int j0 = 0; j0 < np; ++j0) buf_in[j0] = row[j0 + np * j1];
        fft.fwd(buf_out, buf_in);
        for (int j0 = 0; j0 < np; ++j0) row[j0 + np * j1] = buf_out[j0];
      }
      for (int j0 = 0; j0 < np; ++j0) {
        for (int j1 = 0; j1 < np; ++j1) buf_in[j1] = row[j0 + np * j1];
        fft.fwd(buf_out, buf_in);
        for (int j1 = 0; j1 < np; ++j1) row[j0 + np * j1] = buf_out[j1];
      }
    }
  }

  std::vector<double> sym(np);
  for (int m = 0; m < np; ++m) {
    const double s = std::sin(2 * M_PI * m / np) / hp;
    sym[m] = s * s;
  }
  const double off = -1.0 / (4 * h1 * h1);
  std::vector<double> cp(rows);
  std::vector<cplx> dp(rows);
  for (long mode = 0; mode < nperp; ++mode) {
    double sigma = 0;
    long rem = mode;
    for (int k = 0; k < g_.d - 1; ++k) {
      sigma += sym[rem % np];
      rem /= np;
    }
    // two decoupled chains: interior rows of equal parity
    for (int parity = 0; parity < 2; ++parity) {
      std::vector<int> idx;
      for (int r = parity; r < rows; r += 2) idx.push_back(r);
      const int n = static_cast<int>(idx.size());
      if (n == 0) continue;
      auto diag = [&](int r) {
        const int i = r + 1;
        const int cnt = (i - 1 >= 1) + (i + 1 <= g_.n1 - 2);
        return cnt / (4 * h1 * h1) + sigma;
      };
      // Thomas algorithm
      double b0 = diag(idx[0]);
      if (std::abs(b0) < 1e-300) throw std::runtime_error("projector: singular chain");
      cp[0] = off / b0;
      dp[0] = spec[static_cast<std::size_t>(idx[0]) * nperp + mode] / b0;
      for (int k = 1; k < n; ++k) {
        const double denom = diag(idx[k]) - off * cp[k - 1];
        if (std::abs(denom) < 1e-300) throw std::runtime_error("projector: singular chain");
        cp[k] = off / denom;
        dp[k] = (spec[static_cast<std::size_t>(idx[k]) * nperp + mode] - off * dp[k - 1]) / denom;
      }
      for (int k = n - 2; k >= 0; --k) dp[k] -= cp[k] * dp[k + 1];
      for (int k = 0; k < n; ++k) spec[static_cast<std::size_t>(idx[k]) * nperp + mode] = dp[k];
    }
  }

  for (int r = 0; r < rows; ++r) {
    cplx* row = &spec[static_cast<std::size_t>(r) * nperp];
    if (g_.d == 2) {
      buf_in.assign(row, row + np);
      fft.inv(buf_out, buf_in);
      std::copy(buf_out.begin(), buf_out.end(), row);
    } else {
      for (int j1 = 0; j1 < np; ++j1) {
        for (int j0 = 0; j0 < np; ++j0) buf_in[j0] = row[j0 + np * j1];
        fft.inv(buf_out, buf_in);
        for (int j0 = 0; j0 < np; ++j0) row[j0 + np * j1] = buf_out[j0];
      }
      for (int j0 = 0; j0 < np; ++j0) {
        for (int j1 = 0; j1 < np; ++j1) buf_in[j1] = row[j0 + np * j1];
        fft.inv(buf_out, buf_in);
        for (int j1 = 0; j1 < np; ++j1) row[j0 + np * j1] = buf_out[j1];
      }
    }
    for (long j = 0; j < nperp; ++j) rhs[r * nperp + j] = row[j].real();
  }
}

void DivFreeProjector::apply(std::vector<double>& u) const {
  const int d = g_.d;
  const long np = g_.n_perp();
  const double h1 = g_.h1(), hp = g_.hp();
  std::vector<double> lam = divergence(u);
  solve(lam);
  auto L = [&](int i, long j) { return (i < 1 || i > g_.n1 - 2) ? 0.0 : lam[(i - 1) * np + j]; };
  for (int i = 1; i < g_.n1 - 1; ++i)
    for (long j = 0; j < np; ++j) {
      double* node = &u[(i * np + j) * d];
      node[0] -= (L(i - 1, j) - L(i + 1, j)) / (2 * h1);
      for (int k = 0; k < d - 1; ++k)
        node[k + 1] -= (L(i, g_.shift(j, k, -1)) - L(i, g_.shift(j, k, 1))) / (2 * hp);
    }
}

Field project_div_free(const Field& f) {
  Field out = f;
  out.apply_bc();
  DivFreeProjector(f.grid).apply(out.values);
  return out;
}

}  // namespace stokes
