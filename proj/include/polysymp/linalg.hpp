#pragma once

// Small dense linear algebra for the verification suites: rank-revealing
// Gauss-Jordan elimination (null spaces, ranks) and Householder least
// squares. Matrices are row-major and sized at runtime; everything here
// assumes the modest dimensions of the exterior-algebra checks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace polysymp {

class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, 0.0) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative size");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  std::vector<double> multiply(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != cols_) throw std::invalid_argument("Matrix::multiply: size mismatch");
    std::vector<double> y(rows_, 0.0);
    for (int i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

// Largest Euclidean column norm; the elimination pivot threshold is
// expressed relative to this so that O(1) data gives an O(1) scale.
inline double max_column_norm(const Matrix& m) {
  double best = 0.0;
  for (int j = 0; j < m.cols(); ++j) {
    double s = 0.0;
    for (int i = 0; i < m.rows(); ++i) s += m(i, j) * m(i, j);
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

namespace detail {

// Reduce m to row echelon form in place with partial pivoting; returns the
// pivot column of each pivot row in order. Entries below threshold are
// treated as zero.
inline std::vector<int> row_echelon(Matrix& m, double threshold) {
  std::vector<int> pivot_cols;
  int row = 0;
  for (int col = 0; col < m.cols() && row < m.rows(); ++col) {
    int best = -1;
    double best_abs = threshold;
    for (int i = row; i < m.rows(); ++i) {
      if (std::fabs(m(i, col)) > best_abs) {
        best_abs = std::fabs(m(i, col));
        best = i;
      }
    }
    if (best < 0) continue;
    for (int j = 0; j < m.cols(); ++j) std::swap(m(row, j), m(best, j));
    const double inv = 1.0 / m(row, col);
    for (int j = 0; j < m.cols(); ++j) m(row, j) *= inv;
    m(row, col) = 1.0;
    for (int i = 0; i < m.rows(); ++i) {
      if (i == row) continue;
      const double f = m(i, col);
      if (f == 0.0) continue;
      for (int j = 0; j < m.cols(); ++j) m(i, j) -= f * m(row, j);
      m(i, col) = 0.0;
    }
    pivot_cols.push_back(col);
    ++row;
  }
  return pivot_cols;
}

}  // namespace detail

inline int rank(Matrix m, double tol_scale = 1e-10) {
  const double threshold = tol_scale * std::max(max_column_norm(m), 1e-300);
  return static_cast<int>(detail::row_echelon(m, threshold).size());
}

// Basis of { x : m x = 0 } via rank-revealing elimination. The pivot
// threshold is tol_scale times the largest column norm. Basis vectors are
// normalized to unit length with their first significant entry positive.
inline std::vector<std::vector<double>> null_space(Matrix m, double tol_scale = 1e-10) {
  const int n = m.cols();
  const double threshold = tol_scale * std::max(max_column_norm(m), 1e-300);
  const std::vector<int> pivot_cols = detail::row_echelon(m, threshold);

  std::vector<bool> is_pivot(n, false);
  for (int c : pivot_cols) is_pivot[c] = true;

  std::vector<std::vector<double>> basis;
  for (int free = 0; free < n; ++free) {
    if (is_pivot[free]) continue;
    std::vector<double> v(n, 0.0);
    v[free] = 1.0;
    for (size_t r = 0; r < pivot_cols.size(); ++r) v[pivot_cols[r]] = -m(static_cast<int>(r), free);
    double norm = 0.0;
    for (double c : v) norm += c * c;
    norm = std::sqrt(norm);
    double lead = 0.0;
    for (double c : v) {
      if (std::fabs(c) > threshold) { lead = c; break; }
    }
    const double scale = (lead < 0.0 ? -1.0 : 1.0) / norm;
    for (double& c : v) c *= scale;
    basis.push_back(std::move(v));
  }
  return basis;
}

// Minimizer of ||a x - b||_2 via Householder QR (requires rows >= cols).
// Tiny diagonal pivots are zeroed rather than divided through, so
// rank-deficient systems return a finite minimizer. If residual is non-null
// it receives ||a x - b||_2 computed against the original data.
inline std::vector<double> least_squares(Matrix a, std::vector<double> b, double* residual = nullptr) {
  const int m = a.rows(), n = a.cols();
  if (static_cast<int>(b.size()) != m) throw std::invalid_argument("least_squares: size mismatch");
  if (m < n) throw std::invalid_argument("least_squares: need rows >= cols");
  const Matrix a0 = a;
  const std::vector<double> b0 = b;

  for (int k = 0; k < n; ++k) {
    double norm = 0.0;
    for (int i = k; i < m; ++i) norm += a(i, k) * a(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    if (a(k, k) > 0.0) norm = -norm;
    std::vector<double> v(m - k);
    for (int i = k; i < m; ++i) v[i - k] = a(i, k);
    v[0] -= norm;
    double vtv = 0.0;
    for (double c : v) vtv += c * c;
    if (vtv == 0.0) continue;
    for (int j = k; j < n; ++j) {
      double dot = 0.0;
      for (int i = k; i < m; ++i) dot += v[i - k] * a(i, j);
      const double f = 2.0 * dot / vtv;
      for (int i = k; i < m; ++i) a(i, j) -= f * v[i - k];
    }
    double dot = 0.0;
    for (int i = k; i < m; ++i) dot += v[i - k] * b[i];
    const double f = 2.0 * dot / vtv;
    for (int i = k; i < m; ++i) b[i] -= f * v[i - k];
  }

  const double tiny = 1e-13 * std::max(max_column_norm(a0), 1e-300);
  std::vector<double> x(n, 0.0);
  for (int k = n - 1; k >= 0; --k) {
    double s = b[k];
    for (int j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = (std::fabs(a(k, k)) > tiny) ? s / a(k, k) : 0.0;
  }

  if (residual) {
    const std::vector<double> ax = a0.multiply(x);
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += (ax[i] - b0[i]) * (ax[i] - b0[i]);
    *residual = std::sqrt(s);
  }
  return x;
}

}  // namespace polysymp
