#pragma once

#include <cstddef>
#include <vector>

namespace attnpipe {

// Dense row-major matrix. Small and boring on purpose: everything in this
// project is either channels x channels (16x16) or channels x samples.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
double trace(const Matrix& a);

// A + B, A - B, s * A
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
// Returns false if a pivot is not strictly positive.
bool cholesky(const Matrix& a, Matrix& lower);

// Solve L y = b and L^T x = y for a lower-triangular L.
std::vector<double> solve_cholesky(const Matrix& lower, const std::vector<double>& b);

// In-place forward/backward substitution against a matrix right-hand side:
// returns L^{-1} B.
Matrix forward_substitute(const Matrix& lower, const Matrix& b);

struct EigenDecomposition {
  std::vector<double> values;  // unordered on return from jacobi_eigen_sym
  Matrix vectors;              // columns are eigenvectors
};

// Cyclic Jacobi rotations for a symmetric matrix; converges to machine
// precision for the small dimensions used here.
EigenDecomposition jacobi_eigen_sym(const Matrix& a, double tol = 1e-14, int max_sweeps = 64);

// Sorts eigenpairs by descending eigenvalue.
void sort_eigen_desc(EigenDecomposition& eig);

}  // namespace attnpipe
