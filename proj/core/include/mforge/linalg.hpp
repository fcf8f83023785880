#pragma once

#include <cstdint>
#include <vector>

namespace mforge {

// LU factorisation with partial pivoting of a small dense row-major matrix.
// Used for the invertible 1x1 mixing layers (C <= 16) and test Jacobians.
class LU {
 public:
  LU(const std::vector<double>& a, int n);

  int n() const { return n_; }
  // Smallest absolute pivot; 0 means exactly singular.
  double min_pivot_abs() const;
  double det() const;
  double log_abs_det() const;  // NumericError if singular
  std::vector<double> solve(const std::vector<double>& b) const;
  std::vector<double> inverse() const;

 private:
  int n_;
  std::vector<double> lu_;
  std::vector<int> piv_;
  int pivot_sign_ = 1;
};

// y = A x for row-major (m x n) A.
std::vector<double> matvec(const std::vector<double>& a, int m, int n,
                           const std::vector<double>& x);

// Mean vector and row-major (d x d) covariance of n observation rows
// (denominator n, not n-1; PCA only needs relative scale).
void mean_and_covariance(const std::vector<std::vector<double>>& rows,
                         std::vector<double>* mean, std::vector<double>* cov);

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
};

// Top-k eigenpairs of a symmetric positive semi-definite matrix via power
// iteration with deflation. Deterministic for a fixed seed.
std::vector<EigenPair> top_eigenpairs(std::vector<double> sym, int d, int k,
                                      double tol = 1e-10, int max_iters = 10000,
                                      std::uint64_t seed = 0x5eedu);

}  // namespace mforge
