#include "covhess/projection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "covhess/error.hpp"

namespace covhess {

ProjectionBasis build_basis(const EigenDecomposition& cov_eig, const EigenDecomposition& hess_eig, std::size_t i,
                            std::size_t j) {
  const std::size_t d_cov = cov_eig.eigenvalues.size();
  const std::size_t d_hess = hess_eig.eigenvalues.size();
  if (d_cov != d_hess) throw Error(ErrorCode::DimensionMismatch, "covariance and curvature dimensions differ");
  if (i == 0 || i > d_cov || j == 0 || j > d_hess) {
    throw Error(ErrorCode::IndexOutOfRange, "eigenvector pair (" + std::to_string(i) + "," + std::to_string(j) +
                                                ") outside 1.." + std::to_string(d_cov));
  }
  ProjectionBasis b;
  b.cov_vector = cov_eig.eigenvectors.column(i - 1);
  b.hess_vector = hess_eig.eigenvectors.column(j - 1);
  b.cov_index = i;
  b.hess_index = j;
  b.degenerate = std::abs(dot(b.cov_vector, b.hess_vector)) > kDegenerateCosine;
  return b;
}

ProjectedData project_onto(const Matrix& x, std::span<const int> labels, const Matrix& directions,
                           std::span<const double> center) {
  if (x.cols() != directions.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "data has " + std::to_string(x.cols()) + " columns, basis " +
                                                  std::to_string(directions.rows()) + " rows");
  }
  if (labels.size() != x.rows()) throw Error(ErrorCode::LengthMismatch, "labels vs rows");
  if (!center.empty() && center.size() != x.cols()) throw Error(ErrorCode::DimensionMismatch, "center length");
  const std::size_t k = directions.cols();
  ProjectedData out;
  out.points = Matrix(x.rows(), k);
  out.labels.assign(labels.begin(), labels.end());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t c = 0; c < k; ++c) {
      double s = 0.0;
      for (std::size_t f = 0; f < row.size(); ++f) {
        const double v = center.empty() ? row[f] : row[f] - center[f];
        s += v * directions(f, c);
      }
      out.points(r, c) = s;
    }
  }
  return out;
}

ProjectedData project(const Matrix& x, std::span<const int> labels, const ProjectionBasis& basis,
                      std::span<const double> center) {
  if (basis.cov_vector.size() != basis.hess_vector.size()) throw Error(ErrorCode::DimensionMismatch, "basis columns");
  Matrix u(basis.cov_vector.size(), 2);
  u.set_column(0, basis.cov_vector);
  u.set_column(1, basis.hess_vector);
  return project_onto(x, labels, u, center);
}

std::pair<std::size_t, std::size_t> CombinationGrid::argmax_lda_ratio() const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < cells.size(); ++k)
    if (cells[k].stats.lda_ratio > cells[best].stats.lda_ratio) best = k;
  return {best / max_j + 1, best % max_j + 1};
}

CombinationGrid combination_grid(const Matrix& x, std::span<const int> labels, const EigenDecomposition& cov_eig,
                                 const EigenDecomposition& hess_eig, std::size_t max_i, std::size_t max_j) {
  if (max_i == 0 || max_j == 0) throw Error(ErrorCode::IndexOutOfRange, "grid needs at least one row and column");
  const Vector center = column_means(x);
  CombinationGrid grid;
  grid.max_i = max_i;
  grid.max_j = max_j;
  for (std::size_t i = 1; i <= max_i; ++i) {
    for (std::size_t j = 1; j <= max_j; ++j) {
      GridCell cell;
      cell.basis = build_basis(cov_eig, hess_eig, i, j);
      cell.projection = project(x, labels, cell.basis, center);
      cell.stats = separability_stats(cell.projection);
      cell.stats.cov_index = i;
      cell.stats.hess_index = j;
      grid.cells.push_back(std::move(cell));
    }
  }
  return grid;
}

std::vector<Contribution> parameter_contributions(std::span<const double> vector, std::span<const std::string> names) {
  if (!names.empty() && names.size() != vector.size()) throw Error(ErrorCode::LengthMismatch, "names vs vector");
  std::vector<Contribution> out;
  out.reserve(vector.size());
  for (std::size_t k = 0; k < vector.size(); ++k) {
    out.push_back({names.empty() ? "f" + std::to_string(k) : names[k], std::abs(vector[k])});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Contribution& a, const Contribution& b) { return a.magnitude > b.magnitude; });
  return out;
}

}  // namespace covhess
