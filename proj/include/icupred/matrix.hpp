#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace icupred {

// Dense row-major matrix of doubles. Deliberately minimal: the network code
// needs exactly the four product kernels below plus elementwise access.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

  std::size_t size() const { return data.size(); }
  void zero() { std::fill(data.begin(), data.end(), 0.0); }

  bool operator==(const Matrix&) const = default;
};

// C (+)= A * B        A: m x k, B: k x n, C: m x n
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate);

// C (+)= A * B^T      A: m x k, B: n x k, C: m x n
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate);

// C (+)= A^T * B      A: k x m, B: k x n, C: m x n
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate);

// Adds a length-cols bias vector to every row.
void add_row_bias(Matrix& m, const std::vector<double>& bias);

// Sums each column into out (length cols), accumulating.
void accumulate_col_sums(const Matrix& m, std::vector<double>& out);

bool all_finite(const Matrix& m);

}  // namespace icupred
