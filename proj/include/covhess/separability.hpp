#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "covhess/dataset.hpp"
#include "covhess/linalg.hpp"
#include "covhess/projection_types.hpp"

namespace covhess {

// Population (divide-by-n) variances throughout, which makes the class
// decomposition identities below exact.

double mean_of(std::span<const double> values);
double population_variance(std::span<const double> values);

/// LDA criteria of a 2D projection: the squared class-mean distance along
/// the first (covariance) coordinate and the summed within-class variance
/// along the second (curvature) coordinate.
struct SeparabilityCell {
  std::size_t cov_index = 1;
  std::size_t hess_index = 1;
  double d_squared = 0.0;
  double within_variance_sum = 0.0;
  double lda_ratio = 0.0;
  /// Zero within-class variance; lda_ratio holds +inf in memory.
  bool lda_ratio_unbounded = false;
};

SeparabilityCell separability_stats(const ProjectedData& proj);

struct Theorem1Result {
  double overall_variance = 0.0;   // sigma^2
  double class1_variance = 0.0;    // sigma_1^2
  double class2_variance = 0.0;    // sigma_2^2
  double mean_distance = 0.0;      // d
  double lambda = 0.0;             // (sigma_1^2 + sigma_2^2) / (2 sigma^2)
  /// |sigma^2 - ((sigma_1^2 + sigma_2^2)/2 + d^2/4)|
  double decomposition_residual = 0.0;
  /// |sigma^2 - d^2 / (4 (1 - lambda))|, or |sigma^2 (1 - lambda) - d^2/4| when degenerate.
  double residual = 0.0;
  /// 1 - lambda vanished (identical class means).
  bool degenerate = false;
};

/// Equal-size 1D classes. Throws ZeroOverallVariance, LengthMismatch.
Theorem1Result theorem1_check(std::span<const double> class1, std::span<const double> class2);

struct Theorem3Result {
  std::array<double, 2> predicted{};  // sigma_w^2 / sigma^2
  std::array<double, 2> observed{};   // within-class variance after z-scoring the pooled data
  double max_residual = 0.0;
};

/// Z-scores the pooled 1D data with fit_zscore/apply_zscore and compares
/// the resulting within-class variances to sigma_w^2 / sigma^2.
Theorem3Result theorem3_check(std::span<const double> class1, std::span<const double> class2);

struct VrptResult {
  double projected_ratio = 0.0;  // var(Y2) / var(Y1)
  double original_ratio = 0.0;   // var(X2) / var(X1)
};

/// Embeds each x as (x, 0), projects onto the unit 2-vector v, and compares
/// variance ratios. Throws DegenerateProjection when v_1 = 0.
VrptResult vrpt_check(std::span<const double> points1, std::span<const double> points2, std::span<const double> v);

struct MeanVectorResult {
  double eigenvalue = 0.0;  // sigma_1^2/2 + sigma_2^2/2 + d^2/4
  double residual = 0.0;    // ||S dmu - eigenvalue dmu|| / ||dmu||
};

/// Builds S = (sigma1_sq/2 + sigma2_sq/2) I + (mu1 - mu2)(mu1 - mu2)^T / 4 and
/// checks that mu1 - mu2 is an eigenvector. Throws ZeroMeanDifference.
MeanVectorResult meanvec_eigen_check(std::span<const double> mu1, std::span<const double> mu2, double sigma1_sq,
                                     double sigma2_sq);

/// |cos(S dmu, dmu)| for the pooled population covariance S of two sampled classes.
double sampled_meanvec_alignment(const Matrix& class1, const Matrix& class2);

struct ClassIsotropy {
  double avg_abs_diagonal = 0.0;
  double avg_abs_offdiagonal = 0.0;
  double diag_uniformity = 0.0;  // max / min diagonal
  double isotropy_score = 0.0;   // avg_abs_offdiagonal / avg_abs_diagonal
};

/// Absolute within-class covariance summaries, indexed by label.
using IsotropyReport = std::array<ClassIsotropy, 2>;

IsotropyReport isotropy_report(const Dataset& data);
ClassIsotropy class_isotropy(const Matrix& class_rows);

}  // namespace covhess
