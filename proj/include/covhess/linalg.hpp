#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace covhess {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  /// Builds an n x 1 column or 1 x n row from a vector.
  static Matrix column_vector(std::span<const double> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  Vector column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> values);

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix transpose(const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);
Vector mat_vec(const Matrix& a, std::span<const double> x);
Matrix outer_product(std::span<const double> u, std::span<const double> v);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
/// Rows indexed by `rows`, in order.
Matrix select_rows(const Matrix& a, std::span<const std::size_t> rows);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
double frobenius_norm(const Matrix& a);
double trace(const Matrix& a);
/// Largest absolute row sum.
double inf_norm(const Matrix& a);
double max_abs(const Matrix& a);

/// Column means of an n x D sample matrix.
Vector column_means(const Matrix& x);

enum class CovarianceBias { Population, Sample };

/// D x D covariance of an n x D sample matrix; Sample divides by n-1, Population by n.
Matrix covariance(const Matrix& x, CovarianceBias bias);

struct EigenDecomposition {
  Vector eigenvalues;  // descending
  Matrix eigenvectors;  // column k pairs with eigenvalues[k]
  int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Rotations are applied in a fixed (p, q) row-major order, so identical input
/// gives bitwise identical output. Iteration stops once the off-diagonal
/// Frobenius norm drops to `tol * ||A||_F`; more than `max_sweeps` sweeps
/// throws NoConvergence. Eigenpairs are stably sorted by descending eigenvalue
/// and every eigenvector is flipped so that its first largest-magnitude
/// component is non-negative.
EigenDecomposition sym_eigen(const Matrix& a, double tol = 1e-12, int max_sweeps = 100);

/// Solves A x = b for symmetric positive definite A by Cholesky.
/// Throws SingularScatterMatrix when a pivot is not positive.
Vector solve_spd(const Matrix& a, std::span<const double> b);

/// Q * diag(lambda) * Q^T.
Matrix reconstruct(const EigenDecomposition& eig);

/// Flip `v` in place so its first largest-magnitude component is non-negative.
void canonicalize_sign(std::span<double> v);

}  // namespace covhess
