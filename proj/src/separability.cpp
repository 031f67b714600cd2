#include "covhess/separability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "covhess/error.hpp"

namespace covhess {

double mean_of(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyDataset, "mean of no values");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double population_variance(std::span<const double> values) {
  const double m = mean_of(values);
  double s = 0.0;
  for (double v : values) s += (v - m) * (v - m);
  return s / static_cast<double>(values.size());
}

SeparabilityCell separability_stats(const ProjectedData& proj) {
  if (proj.points.cols() != 2) throw Error(ErrorCode::DimensionMismatch, "separability_stats needs 2D points");
  if (proj.points.rows() != proj.labels.size()) throw Error(ErrorCode::LengthMismatch, "points vs labels");
  std::array<std::vector<double>, 2> sep_axis;
  std::array<std::vector<double>, 2> compact_axis;
  for (std::size_t r = 0; r < proj.labels.size(); ++r) {
    const auto c = static_cast<std::size_t>(proj.labels[r]);
    sep_axis[c].push_back(proj.points(r, 0));
    compact_axis[c].push_back(proj.points(r, 1));
  }
  if (sep_axis[0].empty() || sep_axis[1].empty()) throw Error(ErrorCode::SingleClass, "projection has one class");

  SeparabilityCell cell;
  const double d = mean_of(sep_axis[1]) - mean_of(sep_axis[0]);
  cell.d_squared = d * d;
  cell.within_variance_sum = population_variance(compact_axis[0]) + population_variance(compact_axis[1]);
  if (cell.within_variance_sum > 0.0) {
    cell.lda_ratio = cell.d_squared / cell.within_variance_sum;
  } else {
    cell.lda_ratio = std::numeric_limits<double>::infinity();
    cell.lda_ratio_unbounded = true;
  }
  return cell;
}

Theorem1Result theorem1_check(std::span<const double> class1, std::span<const double> class2) {
  if (class1.size() != class2.size()) {
    throw Error(ErrorCode::LengthMismatch, "classes must be the same size (" + std::to_string(class1.size()) +
                                               " vs " + std::to_string(class2.size()) + ")");
  }
  if (class1.empty()) throw Error(ErrorCode::EmptyDataset, "empty classes");
  std::vector<double> pooled(class1.begin(), class1.end());
  pooled.insert(pooled.end(), class2.begin(), class2.end());

  // 1 - lambda cancels badly when the class means nearly coincide, so the
  // moments feeding it are accumulated in extended precision.
  auto mean_ld = [](std::span<const double> v) {
    long double s = 0.0L;
    for (double x : v) s += x;
    return s / static_cast<long double>(v.size());
  };
  auto var_ld = [&](std::span<const double> v) {
    const long double m = mean_ld(v);
    long double s = 0.0L;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<long double>(v.size());
  };
  const long double var = var_ld(pooled);
  const long double var1 = var_ld(class1);
  const long double var2 = var_ld(class2);
  const long double dist = mean_ld(class2) - mean_ld(class1);
  const long double d2 = dist * dist;

  Theorem1Result r;
  r.overall_variance = static_cast<double>(var);
  if (!(r.overall_variance > 0.0)) throw Error(ErrorCode::ZeroOverallVariance, "pooled data is constant");
  r.class1_variance = static_cast<double>(var1);
  r.class2_variance = static_cast<double>(var2);
  r.mean_distance = static_cast<double>(dist < 0 ? -dist : dist);
  const long double lambda = (var1 + var2) / (2.0L * var);
  r.lambda = static_cast<double>(lambda);
  r.decomposition_residual = static_cast<double>(std::abs(var - (0.5L * (var1 + var2) + 0.25L * d2)));
  const long double gap = 1.0L - lambda;
  if (std::abs(gap) <= 1e-12L) {
    r.degenerate = true;
    r.residual = static_cast<double>(std::abs(var * gap - 0.25L * d2));
  } else {
    r.residual = static_cast<double>(std::abs(var - d2 / (4.0L * gap)));
  }
  return r;
}

Theorem3Result theorem3_check(std::span<const double> class1, std::span<const double> class2) {
  if (class1.empty() || class2.empty()) throw Error(ErrorCode::SingleClass, "both classes need samples");
  const std::size_t n = class1.size() + class2.size();
  Matrix x(n, 1);
  std::vector<int> labels(n);
  std::vector<double> pooled;
  for (std::size_t i = 0; i < class1.size(); ++i) x(i, 0) = class1[i];
  for (std::size_t i = 0; i < class2.size(); ++i) {
    x(class1.size() + i, 0) = class2[i];
    labels[class1.size() + i] = 1;
  }
  pooled = x.column(0);
  const Dataset raw = make_dataset(x, labels);
  const Dataset z = apply_zscore(raw, fit_zscore(raw));

  Theorem3Result r;
  const double total = population_variance(pooled);
  r.predicted = {population_variance(class1) / total, population_variance(class2) / total};
  for (int c = 0; c < 2; ++c) {
    const Vector zc = z.class_rows(c).column(0);
    r.observed[static_cast<std::size_t>(c)] = population_variance(zc);
    r.max_residual = std::max(r.max_residual, std::abs(r.observed[c] - r.predicted[c]));
  }
  return r;
}

VrptResult vrpt_check(std::span<const double> points1, std::span<const double> points2, std::span<const double> v) {
  if (v.size() != 2) throw Error(ErrorCode::DimensionMismatch, "v must be a 2-vector");
  if (std::abs(norm2(v) - 1.0) > 1e-10) throw Error(ErrorCode::InvalidArgument, "v must be unit length");
  if (v[0] == 0.0) throw Error(ErrorCode::DegenerateProjection, "v_1 = 0 collapses the embedded axis");
  if (points1.size() < 2 || points2.size() < 2) throw Error(ErrorCode::TooFewSamples, "each subset needs 2 points");

  auto project = [&](std::span<const double> xs) {
    std::vector<double> ys;
    ys.reserve(xs.size());
    for (double x : xs) {
      const double embedded[2] = {x, 0.0};
      ys.push_back(dot(embedded, v));
    }
    return ys;
  };
  const auto y1 = project(points1);
  const auto y2 = project(points2);
  const double vx1 = population_variance(points1);
  if (!(vx1 > 0.0)) throw Error(ErrorCode::ZeroOverallVariance, "first subset has zero variance");
  VrptResult r;
  r.original_ratio = population_variance(points2) / vx1;
  r.projected_ratio = population_variance(y2) / population_variance(y1);
  return r;
}

MeanVectorResult meanvec_eigen_check(std::span<const double> mu1, std::span<const double> mu2, double sigma1_sq,
                                     double sigma2_sq) {
  if (mu1.size() != mu2.size()) throw Error(ErrorCode::DimensionMismatch, "mean vectors differ in length");
  const std::size_t d = mu1.size();
  Vector diff(d);
  for (std::size_t i = 0; i < d; ++i) diff[i] = mu1[i] - mu2[i];
  const double dist = norm2(diff);
  if (!(dist > 0.0)) throw Error(ErrorCode::ZeroMeanDifference, "class means coincide");

  Matrix s = add(scale(Matrix::identity(d), 0.5 * sigma1_sq + 0.5 * sigma2_sq), scale(outer_product(diff, diff), 0.25));
  MeanVectorResult r;
  r.eigenvalue = 0.5 * sigma1_sq + 0.5 * sigma2_sq + 0.25 * dist * dist;
  Vector sd = mat_vec(s, diff);
  for (std::size_t i = 0; i < d; ++i) sd[i] -= r.eigenvalue * diff[i];
  r.residual = norm2(sd) / dist;
  return r;
}

double sampled_meanvec_alignment(const Matrix& class1, const Matrix& class2) {
  if (class1.cols() != class2.cols()) throw Error(ErrorCode::DimensionMismatch, "class widths differ");
  const Vector m1 = column_means(class1);
  const Vector m2 = column_means(class2);
  Vector diff(m1.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = m1[i] - m2[i];
  if (!(norm2(diff) > 0.0)) throw Error(ErrorCode::ZeroMeanDifference, "class means coincide");

  Matrix pooled(class1.rows() + class2.rows(), class1.cols());
  for (std::size_t r = 0; r < class1.rows(); ++r) std::copy_n(class1.row(r).begin(), class1.cols(), pooled.row(r).begin());
  for (std::size_t r = 0; r < class2.rows(); ++r)
    std::copy_n(class2.row(r).begin(), class2.cols(), pooled.row(class1.rows() + r).begin());
  const Vector sd = mat_vec(covariance(pooled, CovarianceBias::Population), diff);
  return std::abs(dot(sd, diff)) / (norm2(sd) * norm2(diff));
}

ClassIsotropy class_isotropy(const Matrix& rows) {
  const Matrix c = covariance(rows, CovarianceBias::Population);
  const std::size_t d = c.rows();
  ClassIsotropy out;
  double diag_sum = 0.0;
  double off_sum = 0.0;
  double diag_min = std::numeric_limits<double>::infinity();
  double diag_max = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double a = std::abs(c(i, j));
      if (i == j) {
        diag_sum += a;
        diag_min = std::min(diag_min, a);
        diag_max = std::max(diag_max, a);
      } else {
        off_sum += a;
      }
    }
  }
  out.avg_abs_diagonal = diag_sum / static_cast<double>(d);
  out.avg_abs_offdiagonal = d > 1 ? off_sum / static_cast<double>(d * d - d) : 0.0;
  out.diag_uniformity = diag_min > 0.0 ? diag_max / diag_min : std::numeric_limits<double>::infinity();
  out.isotropy_score = out.avg_abs_diagonal > 0.0 ? out.avg_abs_offdiagonal / out.avg_abs_diagonal : 0.0;
  return out;
}

IsotropyReport isotropy_report(const Dataset& data) {
  if (!data.has_both_classes()) throw Error(ErrorCode::SingleClass, "isotropy report needs both classes");
  return {class_isotropy(data.class_rows(0)), class_isotropy(data.class_rows(1))};
}

}  // namespace covhess
