#include "covhess/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "covhess/error.hpp"

namespace covhess {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(op) + ": " + shape(a) + " vs " + shape(b));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::DimensionMismatch,
                "matrix data length " + std::to_string(data_.size()) + " for shape " +
                    std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorCode::DimensionMismatch, "ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::column_vector(std::span<const double> v) {
  return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Vector Matrix::column(std::size_t c) const {
  if (c >= cols_) throw Error(ErrorCode::IndexOutOfRange, "column " + std::to_string(c));
  Vector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::set_column(std::size_t c, std::span<const double> values) {
  if (c >= cols_) throw Error(ErrorCode::IndexOutOfRange, "column " + std::to_string(c));
  if (values.size() != rows_) throw Error(ErrorCode::DimensionMismatch, "set_column length");
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "matmul: " + shape(a) + " * " + shape(b));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Vector mat_vec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "mat_vec: " + shape(a) + " * vector of " + std::to_string(x.size()));
  }
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), x);
  return out;
}

Matrix outer_product(std::span<const double> u, std::span<const double> v) {
  Matrix out(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out(i, j) = u[i] * v[j];
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Matrix scale(const Matrix& a, double s) {
  Matrix out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

Matrix select_rows(const Matrix& a, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= a.rows()) throw Error(ErrorCode::IndexOutOfRange, "row " + std::to_string(rows[i]));
    std::copy_n(a.row(rows[i]).begin(), a.cols(), out.row(i).begin());
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "dot length");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double frobenius_norm(const Matrix& a) { return norm2(a.data()); }

double trace(const Matrix& a) {
  if (!a.is_square()) throw Error(ErrorCode::NonSquare, "trace of " + shape(a));
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
  return s;
}

double inf_norm(const Matrix& a) {
  double best = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (double v : a.row(r)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

double max_abs(const Matrix& a) {
  double best = 0.0;
  for (double v : a.data()) best = std::max(best, std::abs(v));
  return best;
}

Vector column_means(const Matrix& x) {
  Vector mean(x.cols(), 0.0);
  if (x.rows() == 0) return mean;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t c = 0; c < x.cols(); ++c) mean[c] += row[c];
  }
  for (double& m : mean) m /= static_cast<double>(x.rows());
  return mean;
}

Matrix covariance(const Matrix& x, CovarianceBias bias) {
  const std::size_t n = x.rows();
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "covariance needs at least 2 samples, got " + std::to_string(n));
  if (!x.all_finite()) throw Error(ErrorCode::InvalidArgument, "covariance input has non-finite entries");
  const std::size_t d = x.cols();
  const Vector mean = column_means(x);
  Matrix s(d, d);
  Vector centered(d);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = x.row(r);
    for (std::size_t c = 0; c < d; ++c) centered[c] = row[c] - mean[c];
    for (std::size_t i = 0; i < d; ++i) {
      const double ci = centered[i];
      for (std::size_t j = i; j < d; ++j) s(i, j) += ci * centered[j];
    }
  }
  const double denom = bias == CovarianceBias::Sample ? static_cast<double>(n - 1) : static_cast<double>(n);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      s(i, j) /= denom;
      s(j, i) = s(i, j);
    }
  }
  return s;
}

void canonicalize_sign(std::span<double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  if (!v.empty() && v[best] < 0.0)
    for (double& x : v) x = -x;
}

EigenDecomposition sym_eigen(const Matrix& input, double tol, int max_sweeps) {
  if (!input.is_square()) throw Error(ErrorCode::NonSquare, "sym_eigen of " + shape(input));
  if (!input.all_finite()) throw Error(ErrorCode::InvalidArgument, "sym_eigen input has non-finite entries");
  const std::size_t n = input.rows();
  const double norm = frobenius_norm(input);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(input(i, j) - input(j, i)) > 1e-12 * norm) {
        throw Error(ErrorCode::NotSymmetric, "entries (" + std::to_string(i) + "," + std::to_string(j) +
                                                 ") differ beyond 1e-12 relative");
      }
    }
  }

  // Work on the exactly symmetrized copy.
  Matrix a = input;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (input(i, j) + input(j, i));
  Matrix v = Matrix::identity(n);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > tol * norm) {
    if (sweep >= max_sweeps) {
      throw Error(ErrorCode::NoConvergence, "Jacobi did not converge in " + std::to_string(max_sweeps) + " sweeps");
    }
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J with J the (p, q) rotation.
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return a(l, l) > a(r, r); });

  EigenDecomposition out;
  out.sweeps = sweep;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  Vector col(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) col[r] = v(r, order[k]);
    canonicalize_sign(col);
    out.eigenvectors.set_column(k, col);
  }
  return out;
}

Vector solve_spd(const Matrix& a, std::span<const double> b) {
  if (!a.is_square()) throw Error(ErrorCode::NonSquare, "solve_spd of " + shape(a));
  const std::size_t n = a.rows();
  if (b.size() != n) throw Error(ErrorCode::DimensionMismatch, "solve_spd right-hand side");
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) {
      throw Error(ErrorCode::SingularScatterMatrix, "non-positive pivot at " + std::to_string(j));
    }
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
    x[i] = s / l(i, i);
  }
  return x;
}

Matrix reconstruct(const EigenDecomposition& eig) {
  const std::size_t n = eig.eigenvalues.size();
  Matrix scaled = eig.eigenvectors;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) scaled(r, c) *= eig.eigenvalues[c];
  return matmul(scaled, transpose(eig.eigenvectors));
}

}  // namespace covhess
