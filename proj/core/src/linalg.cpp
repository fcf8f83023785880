#include "mforge/linalg.hpp"

#include <cmath>
#include <cstdlib>

#include "mforge/errors.hpp"
#include "mforge/rng.hpp"

namespace mforge {

LU::LU(const std::vector<double>& a, int n) : n_(n), lu_(a), piv_(static_cast<std::size_t>(n)) {
  if (static_cast<int>(a.size()) != n * n) throw UsageError("LU: matrix size mismatch");
  for (int i = 0; i < n; ++i) piv_[i] = i;
  for (int col = 0; col < n; ++col) {
    int p = col;
    double best = std::fabs(lu_[static_cast<std::size_t>(col) * n + col]);
    for (int r = col + 1; r < n; ++r) {
      const double v = std::fabs(lu_[static_cast<std::size_t>(r) * n + col]);
      if (v > best) {
        best = v;
        p = r;
      }
    }
    if (p != col) {
      for (int j = 0; j < n; ++j) std::swap(lu_[static_cast<std::size_t>(p) * n + j], lu_[static_cast<std::size_t>(col) * n + j]);
      std::swap(piv_[p], piv_[col]);
      pivot_sign_ = -pivot_sign_;
    }
    const double pivot = lu_[static_cast<std::size_t>(col) * n + col];
    if (pivot == 0.0) continue;  // singular; detected by callers via min_pivot_abs
    for (int r = col + 1; r < n; ++r) {
      const double f = lu_[static_cast<std::size_t>(r) * n + col] / pivot;
      lu_[static_cast<std::size_t>(r) * n + col] = f;
      for (int j = col + 1; j < n; ++j) {
        lu_[static_cast<std::size_t>(r) * n + j] -= f * lu_[static_cast<std::size_t>(col) * n + j];
      }
    }
  }
}

double LU::min_pivot_abs() const {
  double m = std::fabs(lu_[0]);
  for (int i = 0; i < n_; ++i) m = std::min(m, std::fabs(lu_[static_cast<std::size_t>(i) * n_ + i]));
  return m;
}

double LU::det() const {
  double d = pivot_sign_;
  for (int i = 0; i < n_; ++i) d *= lu_[static_cast<std::size_t>(i) * n_ + i];
  return d;
}

double LU::log_abs_det() const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double p = std::fabs(lu_[static_cast<std::size_t>(i) * n_ + i]);
    if (p == 0.0) throw NumericError("log_abs_det of a singular matrix");
    s += std::log(p);
  }
  return s;
}

std::vector<double> LU::solve(const std::vector<double>& b) const {
  if (static_cast<int>(b.size()) != n_) throw UsageError("LU::solve dimension mismatch");
  std::vector<double> x(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) x[i] = b[static_cast<std::size_t>(piv_[i])];
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < i; ++j) x[i] -= lu_[static_cast<std::size_t>(i) * n_ + j] * x[j];
  }
  for (int i = n_ - 1; i >= 0; --i) {
    for (int j = i + 1; j < n_; ++j) x[i] -= lu_[static_cast<std::size_t>(i) * n_ + j] * x[j];
    const double p = lu_[static_cast<std::size_t>(i) * n_ + i];
    if (p == 0.0) throw NumericError("LU::solve on a singular matrix");
    x[i] /= p;
  }
  return x;
}

std::vector<double> LU::inverse() const {
  std::vector<double> inv(static_cast<std::size_t>(n_) * n_);
  std::vector<double> e(static_cast<std::size_t>(n_), 0.0);
  for (int col = 0; col < n_; ++col) {
    e[col] = 1.0;
    const std::vector<double> x = solve(e);
    for (int r = 0; r < n_; ++r) inv[static_cast<std::size_t>(r) * n_ + col] = x[r];
    e[col] = 0.0;
  }
  return inv;
}

std::vector<double> matvec(const std::vector<double>& a, int m, int n,
                           const std::vector<double>& x) {
  std::vector<double> y(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* row = a.data() + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

void mean_and_covariance(const std::vector<std::vector<double>>& rows,
                         std::vector<double>* mean, std::vector<double>* cov) {
  if (rows.empty()) throw UsageError("covariance of an empty set");
  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(rows[0].size());
  mean->assign(static_cast<std::size_t>(d), 0.0);
  for (const auto& r : rows) {
    for (int j = 0; j < d; ++j) (*mean)[j] += r[j];
  }
  for (int j = 0; j < d; ++j) (*mean)[j] /= n;
  cov->assign(static_cast<std::size_t>(d) * d, 0.0);
  std::vector<double> centered(static_cast<std::size_t>(d));
  for (const auto& r : rows) {
    for (int j = 0; j < d; ++j) centered[j] = r[j] - (*mean)[j];
    for (int i = 0; i < d; ++i) {
      const double ci = centered[i];
      if (ci == 0.0) continue;
      double* row = cov->data() + static_cast<std::size_t>(i) * d;
      for (int j = 0; j < d; ++j) row[j] += ci * centered[j];
    }
  }
  for (double& v : *cov) v /= n;
}

std::vector<EigenPair> top_eigenpairs(std::vector<double> sym, int d, int k, double tol,
                                      int max_iters, std::uint64_t seed) {
  if (k < 1 || k > d) throw UsageError("top_eigenpairs: k out of range");
  std::vector<EigenPair> out;
  Xoshiro256pp rng(seed);
  for (int comp = 0; comp < k; ++comp) {
    std::vector<double> v(static_cast<std::size_t>(d));
    for (double& x : v) x = rng.normal();
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;

    double lambda = 0.0;
    for (int it = 0; it < max_iters; ++it) {
      std::vector<double> w = matvec(sym, d, d, v);
      double wn = 0.0;
      for (double x : w) wn += x * x;
      wn = std::sqrt(wn);
      if (wn == 0.0) break;  // acting on the null space; eigenvalue 0
      double diff = 0.0;
      for (int j = 0; j < d; ++j) {
        w[j] /= wn;
        diff = std::max(diff, std::fabs(std::fabs(w[j]) - std::fabs(v[j])));
      }
      v = w;
      lambda = wn;
      if (diff < tol) break;
    }
    // Rayleigh quotient for the converged direction
    const std::vector<double> sv = matvec(sym, d, d, v);
    lambda = 0.0;
    for (int j = 0; j < d; ++j) lambda += v[j] * sv[j];

    out.push_back({lambda, v});
    // deflate
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        sym[static_cast<std::size_t>(i) * d + j] -= lambda * v[i] * v[j];
      }
    }
  }
  return out;
}

}  // namespace mforge
