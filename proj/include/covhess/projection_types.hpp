#pragma once

#include <cstddef>
#include <vector>

#include "covhess/linalg.hpp"

namespace covhess {

/// Pairs the i-th covariance eigenvector with the j-th curvature
/// eigenvector (both 1-based, descending eigenvalue order).
struct ProjectionBasis {
  Vector cov_vector;
  Vector hess_vector;
  std::size_t cov_index = 1;
  std::size_t hess_index = 1;
  /// |cos| between the two columns exceeds kDegenerateCosine.
  bool degenerate = false;
};

inline constexpr double kDegenerateCosine = 0.999;

struct ProjectedData {
  Matrix points;  // n x k, k = 2 for a ProjectionBasis
  std::vector<int> labels;
};

}  // namespace covhess
