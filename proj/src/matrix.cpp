#include "icupred/matrix.hpp"

#include <cmath>

namespace icupred {

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  assert(a.cols == b.rows && a.rows == c.rows && b.cols == c.cols);
  if (!accumulate) c.zero();
  const int m = a.rows, k = a.cols, n = b.cols;
  for (int i = 0; i < m; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b.row(p);
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  assert(a.cols == b.cols && a.rows == c.rows && b.rows == c.cols);
  const int m = a.rows, k = a.cols, n = b.rows;
  for (int i = 0; i < m; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int j = 0; j < n; ++j) {
      const double* brow = b.row(j);
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] = accumulate ? crow[j] + acc : acc;
    }
  }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  assert(a.rows == b.rows && a.cols == c.rows && b.cols == c.cols);
  if (!accumulate) c.zero();
  const int k = a.rows, m = a.cols, n = b.cols;
  for (int p = 0; p < k; ++p) {
    const double* arow = a.row(p);
    const double* brow = b.row(p);
    for (int i = 0; i < m; ++i) {
      const double av = arow[i];
      double* crow = c.row(i);
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void add_row_bias(Matrix& m, const std::vector<double>& bias) {
  assert(static_cast<int>(bias.size()) == m.cols);
  for (int i = 0; i < m.rows; ++i) {
    double* row = m.row(i);
    for (int j = 0; j < m.cols; ++j) row[j] += bias[j];
  }
}

void accumulate_col_sums(const Matrix& m, std::vector<double>& out) {
  assert(static_cast<int>(out.size()) == m.cols);
  for (int i = 0; i < m.rows; ++i) {
    const double* row = m.row(i);
    for (int j = 0; j < m.cols; ++j) out[j] += row[j];
  }
}

bool all_finite(const Matrix& m) {
  for (double v : m.data)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace icupred
