#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "covhess/linalg.hpp"
#include "covhess/projection_types.hpp"
#include "covhess/separability.hpp"

namespace covhess {

/// Columns from the i-th covariance and j-th curvature eigenvectors
/// (1-based). Throws IndexOutOfRange.
ProjectionBasis build_basis(const EigenDecomposition& cov_eig, const EigenDecomposition& hess_eig, std::size_t i,
                            std::size_t j);

/// (X - center) * U with U = [cov_vector, hess_vector]. An empty `center`
/// projects X as-is; centering shifts every coordinate by a constant, so
/// class-mean distances and variances are unaffected.
ProjectedData project(const Matrix& x, std::span<const int> labels, const ProjectionBasis& basis,
                      std::span<const double> center = {});

/// (X - center) * directions for a D x k direction matrix.
ProjectedData project_onto(const Matrix& x, std::span<const int> labels, const Matrix& directions,
                           std::span<const double> center = {});

struct GridCell {
  ProjectionBasis basis;
  ProjectedData projection;
  SeparabilityCell stats;
};

struct CombinationGrid {
  std::size_t max_i = 0;
  std::size_t max_j = 0;
  std::vector<GridCell> cells;  // row-major in (i, j)

  const GridCell& at(std::size_t i, std::size_t j) const { return cells[(i - 1) * max_j + (j - 1)]; }
  /// 1-based (i, j) of the largest LDA ratio; the first cell wins ties.
  std::pair<std::size_t, std::size_t> argmax_lda_ratio() const;
};

/// Projects the data (centered on its own mean) onto every pair of the first
/// max_i covariance and max_j curvature eigenvectors.
CombinationGrid combination_grid(const Matrix& x, std::span<const int> labels, const EigenDecomposition& cov_eig,
                                 const EigenDecomposition& hess_eig, std::size_t max_i, std::size_t max_j);

struct Contribution {
  std::string name;
  double magnitude = 0.0;
};

/// |components| sorted descending (stable). Empty names become f0..f{D-1}.
std::vector<Contribution> parameter_contributions(std::span<const double> vector,
                                                  std::span<const std::string> names = {});

}  // namespace covhess
