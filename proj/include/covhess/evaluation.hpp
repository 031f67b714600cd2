#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "covhess/curvature.hpp"
#include "covhess/dataset.hpp"
#include "covhess/linalg.hpp"
#include "covhess/mlp.hpp"
#include "covhess/projection_types.hpp"

namespace covhess {

// ---------------------------------------------------------------- linear SVM

struct SvmConfig {
  double lambda = 1e-2;
  std::size_t epochs = 2000;
  std::uint64_t seed = 0;
};

struct LinearSvm {
  Vector weights;
  double bias = 0.0;
  double lambda = 1e-2;
  std::uint64_t seed = 0;
  bool trained = false;

  double decision(std::span<const double> x) const;
  int predict(std::span<const double> x) const;  // 1 if decision > 0
};

/// Pegasos-style primal subgradient descent on
///   (lambda/2)||w||^2 + (1/n) sum_i max(0, 1 - y_i (w.x_i + b)),  y_i = +-1,
/// with step 1/(lambda t) and a seeded per-epoch shuffle. The bias is not
/// regularized.
LinearSvm svm_train(const Matrix& points, std::span<const int> labels, const SvmConfig& config);

double svm_objective(const Vector& weights, double bias, double lambda, const Matrix& points,
                     std::span<const int> labels);
inline double svm_objective(const LinearSvm& svm, const Matrix& points, std::span<const int> labels) {
  return svm_objective(svm.weights, svm.bias, svm.lambda, points, labels);
}

// ------------------------------------------------------------------- metrics

struct MetricsReport {
  double f1 = 0.0;
  double roc_auc = 0.0;
  double cohen_kappa = 0.0;
  double accuracy = 0.0;
  double geometric_mean = 0.0;
  double precision = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Positive class is 1. AUC is the rank statistic with average ranks for
/// ties; threshold-based metrics use `predictions`.
MetricsReport metrics(std::span<const int> predictions, std::span<const double> scores, std::span<const int> labels);

/// Mann-Whitney AUC from average ranks.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// ----------------------------------------------------------------- baselines

enum class Method { Proposed, Pca, Lda, HessianOnly, DnnFull };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);
bool needs_model(Method method);
inline constexpr Method kAllMethods[] = {Method::Pca, Method::Lda, Method::HessianOnly, Method::Proposed,
                                         Method::DnnFull};

struct BaselineOptions {
  CurvatureMethod curvature = CurvatureMethod::Fisher;
  SvmConfig svm;
};

struct BaselineOutcome {
  Method method = Method::Proposed;
  Matrix directions;  // D x k projection; empty for dnn_full
  Vector center;      // training mean subtracted before projection
  ProjectedData train_projection;
  ProjectedData test_projection;
  std::optional<LinearSvm> svm;
  double svm_initial_objective = 0.0;
  double svm_final_objective = 0.0;
  MetricsReport train_metrics;
  MetricsReport test_metrics;
};

/// Eigenbases fitted on one training split, shared by the methods.
struct FittedBases {
  EigenDecomposition covariance;
  std::optional<EigenDecomposition> curvature;
};

FittedBases fit_bases(const Dataset& train, const MlpModel* model, CurvatureMethod curvature);

/// Fisher direction S_w^{-1} (mu_1 - mu_0), S_w the pooled within-class
/// scatter plus 1e-8 I; unit length.
Vector lda_direction(const Dataset& train);

/// Fits the method's projection on `train` only, applies it to both splits,
/// trains the SVM on the projected train split and scores the test split.
/// Throws MissingModel when a model-dependent method gets no model.
BaselineOutcome run_baseline(Method method, const Dataset& train, const Dataset& test, const MlpModel* model,
                             const BaselineOptions& options = {});
BaselineOutcome run_baseline(Method method, const Dataset& train, const Dataset& test, const MlpModel* model,
                             const FittedBases& bases, const BaselineOptions& options);

// ---------------------------------------------------------- cross-validation

enum class Stage { Normalization, NetworkTraining, Eigenbasis, SvmFit, Evaluation };
std::string_view to_string(Stage stage);

/// Called with the original row indices each stage consumes. Must be
/// thread-safe when folds run in parallel.
using RowObserver = std::function<void(std::size_t fold, Stage stage, std::span<const std::size_t> rows)>;

struct CvConfig {
  TrainConfig train;
  std::vector<std::size_t> hidden{64, 32, 16};
  BaselineOptions baseline;
  std::size_t threads = 1;
  RowObserver observer;
};

struct FoldOutcome {
  std::size_t fold = 0;
  NormalizationParams normalization;
  std::optional<MlpModel> model;
  std::optional<TrainReport> train_report;
  std::vector<BaselineOutcome> methods;  // in requested order
};

struct MetricsSummary {
  MetricsReport mean;
  MetricsReport stddev;  // sample standard deviation over folds
};

struct ComparisonResult {
  Method method = Method::Proposed;
  std::vector<MetricsReport> folds;
  MetricsSummary summary;
};

struct CvResult {
  std::size_t k = 0;
  std::vector<ComparisonResult> comparisons;
  std::vector<FoldOutcome> folds;
};

/// One fold: z-score fitted on the fold's train rows, DNN trained when a
/// method needs it (seeds offset by the fold index), then every method.
FoldOutcome run_fold(const Dataset& data, const FoldPlan& plan, std::size_t fold, std::span<const Method> methods,
                     const CvConfig& config);

CvResult cross_validate(const Dataset& data, const FoldPlan& plan, std::span<const Method> methods,
                        const CvConfig& config);

MetricsSummary summarize(std::span<const MetricsReport> folds);

}  // namespace covhess
