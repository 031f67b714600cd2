#include "covhess/evaluation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include "covhess/error.hpp"
#include "covhess/projection.hpp"
#include "covhess/random.hpp"

namespace covhess {

namespace {

void require_both_classes(std::span<const int> labels, const char* what) {
  bool has0 = false, has1 = false;
  for (int y : labels) {
    if (y == 0) has0 = true;
    else if (y == 1) has1 = true;
    else throw Error(ErrorCode::NonBinaryLabel, std::string(what) + ": label " + std::to_string(y));
  }
  if (!has0 || !has1) throw Error(ErrorCode::SingleClass, std::string(what) + " needs both classes");
}

double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

// ---------------------------------------------------------------- linear SVM

double LinearSvm::decision(std::span<const double> x) const {
  if (!trained) throw Error(ErrorCode::InvalidArgument, "SVM used before training");
  if (x.size() != weights.size()) throw Error(ErrorCode::DimensionMismatch, "SVM input dimension");
  return dot(weights, x) + bias;
}

int LinearSvm::predict(std::span<const double> x) const { return decision(x) > 0.0 ? 1 : 0; }

LinearSvm svm_train(const Matrix& points, std::span<const int> labels, const SvmConfig& config) {
  if (points.rows() != labels.size()) throw Error(ErrorCode::LengthMismatch, "points vs labels");
  if (!(config.lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "SVM lambda must be positive");
  if (!points.all_finite()) throw Error(ErrorCode::InvalidArgument, "SVM input has non-finite values");
  require_both_classes(labels, "svm_train");

  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  LinearSvm svm;
  svm.weights.assign(d, 0.0);
  svm.lambda = config.lambda;
  svm.seed = config.seed;

  Rng rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  double t = 0.0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t idx : order) {
      t += 1.0;
      const double eta = 1.0 / (config.lambda * t);
      auto x = points.row(idx);
      const double y = labels[idx] == 1 ? 1.0 : -1.0;
      const double margin = y * (dot(svm.weights, x) + svm.bias);
      const double shrink = 1.0 - eta * config.lambda;
      for (double& w : svm.weights) w *= shrink;
      if (margin < 1.0) {
        for (std::size_t k = 0; k < d; ++k) svm.weights[k] += eta * y * x[k];
        svm.bias += eta * y;
      }
    }
  }
  for (double w : svm.weights)
    if (!std::isfinite(w)) throw Error(ErrorCode::DivergedLoss, "SVM weights diverged");
  svm.trained = true;
  return svm;
}

double svm_objective(const Vector& weights, double bias, double lambda, const Matrix& points,
                     std::span<const int> labels) {
  if (points.rows() != labels.size()) throw Error(ErrorCode::LengthMismatch, "points vs labels");
  if (points.rows() == 0) throw Error(ErrorCode::EmptyDataset, "svm_objective on empty data");
  double hinge = 0.0;
  for (std::size_t r = 0; r < points.rows(); ++r) {
    const double y = labels[r] == 1 ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - y * (dot(weights, points.row(r)) + bias));
  }
  return 0.5 * lambda * dot(weights, weights) + hinge / static_cast<double>(points.rows());
}

// ------------------------------------------------------------------- metrics

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::LengthMismatch, "scores vs labels");
  require_both_classes(labels, "roc_auc");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) rank_sum += avg_rank;
    i = j;
  }
  for (int y : labels) n_pos += y == 1;
  const double p = static_cast<double>(n_pos);
  const double q = static_cast<double>(n - n_pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

MetricsReport metrics(std::span<const int> predictions, std::span<const double> scores, std::span<const int> labels) {
  if (predictions.size() != labels.size() || scores.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "predictions, scores and labels must have equal length");
  }
  if (labels.empty()) throw Error(ErrorCode::EmptyDataset, "metrics on empty data");
  require_both_classes(labels, "metrics");

  MetricsReport m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = predictions[i] == 1;
    const bool truth = labels[i] == 1;
    if (pred && truth) ++m.tp;
    else if (pred) ++m.fp;
    else if (truth) ++m.fn;
    else ++m.tn;
  }
  const double tp = static_cast<double>(m.tp), fp = static_cast<double>(m.fp);
  const double tn = static_cast<double>(m.tn), fn = static_cast<double>(m.fn);
  const double n = tp + fp + tn + fn;

  m.accuracy = (tp + tn) / n;
  m.precision = safe_ratio(tp, tp + fp);
  m.sensitivity = safe_ratio(tp, tp + fn);
  m.specificity = safe_ratio(tn, tn + fp);
  m.f1 = safe_ratio(2.0 * tp, 2.0 * tp + fp + fn);
  m.geometric_mean = std::sqrt(m.sensitivity * m.specificity);

  // Integer-valued form of (po - pe) / (1 - pe) scaled by n^2.
  const double chance = (tp + fp) * (tp + fn) + (tn + fn) * (tn + fp);
  const double denom = n * n - chance;
  m.cohen_kappa = denom == 0.0 ? 1.0 : (n * (tp + tn) - chance) / denom;

  m.roc_auc = roc_auc(scores, labels);
  return m;
}

// ----------------------------------------------------------------- baselines

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Proposed: return "proposed";
    case Method::Pca: return "pca";
    case Method::Lda: return "lda";
    case Method::HessianOnly: return "hessian_only";
    case Method::DnnFull: return "dnn_full";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods)
    if (to_string(m) == name) return m;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

bool needs_model(Method method) {
  return method == Method::Proposed || method == Method::HessianOnly || method == Method::DnnFull;
}

FittedBases fit_bases(const Dataset& train, const MlpModel* model, CurvatureMethod curvature) {
  FittedBases b;
  b.covariance = sym_eigen(covariance(train.features, CovarianceBias::Sample));
  if (model != nullptr) b.curvature = sym_eigen(compute_curvature(*model, train, curvature).matrix);
  return b;
}

Vector lda_direction(const Dataset& train) {
  const std::size_t d = train.dims();
  std::array<Vector, 2> means;
  Matrix sw(d, d);
  for (int label : {0, 1}) {
    const Matrix x = train.class_rows(label);
    if (x.rows() == 0) throw Error(ErrorCode::SingleClass, "LDA needs both classes");
    means[label] = column_means(x);
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t i = 0; i < d; ++i) {
        const double di = x(r, i) - means[label][i];
        for (std::size_t j = 0; j < d; ++j) sw(i, j) += di * (x(r, j) - means[label][j]);
      }
  }
  for (std::size_t i = 0; i < d; ++i) sw(i, i) += 1e-8;
  Vector diff(d);
  for (std::size_t i = 0; i < d; ++i) diff[i] = means[1][i] - means[0][i];
  Vector w = solve_spd(sw, diff);
  const double len = norm2(w);
  if (!(len > 0.0) || !std::isfinite(len)) throw Error(ErrorCode::SingularScatterMatrix, "LDA direction degenerate");
  for (double& v : w) v /= len;
  canonicalize_sign(w);
  return w;
}

namespace {

Matrix leading_columns(const EigenDecomposition& eig, std::size_t k) {
  const std::size_t d = eig.eigenvectors.rows();
  if (k > eig.eigenvectors.cols()) throw Error(ErrorCode::IndexOutOfRange, "not enough eigenvectors");
  Matrix u(d, k);
  for (std::size_t c = 0; c < k; ++c) u.set_column(c, eig.eigenvectors.column(c));
  return u;
}

const EigenDecomposition& curvature_of(const FittedBases& bases) {
  if (!bases.curvature) throw Error(ErrorCode::MissingModel, "curvature basis requires a trained model");
  return *bases.curvature;
}

MetricsReport score_svm(const LinearSvm& svm, const ProjectedData& data) {
  std::vector<int> preds(data.labels.size());
  std::vector<double> scores(data.labels.size());
  for (std::size_t r = 0; r < data.labels.size(); ++r) {
    scores[r] = svm.decision(data.points.row(r));
    preds[r] = scores[r] > 0.0 ? 1 : 0;
  }
  return metrics(preds, scores, data.labels);
}

MetricsReport score_dnn(const MlpModel& model, const Dataset& data) {
  const std::vector<double> probs = predict_proba(model, data.features);
  std::vector<int> preds(probs.size());
  for (std::size_t r = 0; r < probs.size(); ++r) preds[r] = probs[r] >= 0.5 ? 1 : 0;
  return metrics(preds, probs, data.labels);
}

}  // namespace

BaselineOutcome run_baseline(Method method, const Dataset& train, const Dataset& test, const MlpModel* model,
                             const FittedBases& bases, const BaselineOptions& options) {
  if (needs_model(method) && model == nullptr) {
    throw Error(ErrorCode::MissingModel, std::string(to_string(method)) + " requires a trained model");
  }
  if (train.dims() != test.dims()) throw Error(ErrorCode::DimensionMismatch, "train and test widths differ");

  BaselineOutcome out;
  out.method = method;
  if (method == Method::DnnFull) {
    out.train_metrics = score_dnn(*model, train);
    out.test_metrics = score_dnn(*model, test);
    return out;
  }

  switch (method) {
    case Method::Pca:
      out.directions = leading_columns(bases.covariance, 2);
      break;
    case Method::HessianOnly:
      out.directions = leading_columns(curvature_of(bases), 2);
      break;
    case Method::Proposed: {
      const ProjectionBasis basis = build_basis(bases.covariance, curvature_of(bases), 1, 1);
      out.directions = Matrix(train.dims(), 2);
      out.directions.set_column(0, basis.cov_vector);
      out.directions.set_column(1, basis.hess_vector);
      break;
    }
    case Method::Lda:
      out.directions = Matrix::column_vector(lda_direction(train));
      break;
    case Method::DnnFull:
      break;
  }
  out.center = column_means(train.features);
  out.train_projection = project_onto(train.features, train.labels, out.directions, out.center);
  out.test_projection = project_onto(test.features, test.labels, out.directions, out.center);

  LinearSvm svm = svm_train(out.train_projection.points, out.train_projection.labels, options.svm);
  out.svm_initial_objective = svm_objective(Vector(svm.weights.size(), 0.0), 0.0, svm.lambda,
                                            out.train_projection.points, out.train_projection.labels);
  out.svm_final_objective = svm_objective(svm, out.train_projection.points, out.train_projection.labels);
  out.train_metrics = score_svm(svm, out.train_projection);
  out.test_metrics = score_svm(svm, out.test_projection);
  out.svm = std::move(svm);
  return out;
}

BaselineOutcome run_baseline(Method method, const Dataset& train, const Dataset& test, const MlpModel* model,
                             const BaselineOptions& options) {
  if (needs_model(method) && model == nullptr) {
    throw Error(ErrorCode::MissingModel, std::string(to_string(method)) + " requires a trained model");
  }
  const bool curvature = method == Method::Proposed || method == Method::HessianOnly;
  return run_baseline(method, train, test, model, fit_bases(train, curvature ? model : nullptr, options.curvature),
                      options);
}

// ---------------------------------------------------------- cross-validation

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Normalization: return "normalization";
    case Stage::NetworkTraining: return "network_training";
    case Stage::Eigenbasis: return "eigenbasis";
    case Stage::SvmFit: return "svm_fit";
    case Stage::Evaluation: return "evaluation";
  }
  return "unknown";
}

FoldOutcome run_fold(const Dataset& data, const FoldPlan& plan, std::size_t fold, std::span<const Method> methods,
                     const CvConfig& config) {
  validate_fold_plan(plan, data.size());
  if (fold >= plan.k) throw Error(ErrorCode::IndexOutOfRange, "fold " + std::to_string(fold));
  const std::vector<std::size_t> train_rows = plan.train_rows(fold);
  const std::vector<std::size_t> test_rows = plan.test_rows(fold);
  auto observe = [&](Stage stage, std::span<const std::size_t> rows) {
    if (config.observer) config.observer(fold, stage, rows);
  };

  FoldOutcome out;
  out.fold = fold;
  const Dataset raw_train = data.subset(train_rows);
  observe(Stage::Normalization, train_rows);
  out.normalization = fit_zscore(raw_train);
  const Dataset train = apply_zscore(raw_train, out.normalization);
  const Dataset test = apply_zscore(data.subset(test_rows), out.normalization);

  const bool want_model = std::any_of(methods.begin(), methods.end(), needs_model);
  const bool want_curvature = std::any_of(methods.begin(), methods.end(), [](Method m) {
    return m == Method::Proposed || m == Method::HessianOnly;
  });
  if (want_model) {
    observe(Stage::NetworkTraining, train_rows);
    TrainConfig tc = config.train;
    tc.seed = config.train.seed + fold;
    TrainResult trained = covhess::train(init_mlp(train.dims(), config.hidden, tc.seed), train, tc);
    out.model = std::move(trained.model);
    out.train_report = std::move(trained.report);
  }

  observe(Stage::Eigenbasis, train_rows);
  const FittedBases bases =
      fit_bases(train, want_curvature ? &*out.model : nullptr, config.baseline.curvature);

  for (Method m : methods) {
    if (m != Method::DnnFull) observe(Stage::SvmFit, train_rows);
    observe(Stage::Evaluation, test_rows);
    out.methods.push_back(run_baseline(m, train, test, out.model ? &*out.model : nullptr, bases, config.baseline));
  }
  return out;
}

MetricsSummary summarize(std::span<const MetricsReport> folds) {
  MetricsSummary s;
  if (folds.empty()) return s;
  const double n = static_cast<double>(folds.size());
  auto field = [&](double MetricsReport::*member) {
    double mean = 0.0;
    for (const MetricsReport& f : folds) mean += f.*member;
    mean /= n;
    double ss = 0.0;
    for (const MetricsReport& f : folds) ss += (f.*member - mean) * (f.*member - mean);
    s.mean.*member = mean;
    s.stddev.*member = folds.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  };
  for (auto member : {&MetricsReport::f1, &MetricsReport::roc_auc, &MetricsReport::cohen_kappa,
                      &MetricsReport::accuracy, &MetricsReport::geometric_mean, &MetricsReport::precision,
                      &MetricsReport::sensitivity, &MetricsReport::specificity}) {
    field(member);
  }
  return s;
}

CvResult cross_validate(const Dataset& data, const FoldPlan& plan, std::span<const Method> methods,
                        const CvConfig& config) {
  validate_fold_plan(plan, data.size());
  if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "no methods requested");

  CvResult result;
  result.k = plan.k;
  result.folds.resize(plan.k);

  const std::size_t workers = std::clamp<std::size_t>(config.threads, 1, plan.k);
  if (workers == 1) {
    for (std::size_t f = 0; f < plan.k; ++f) result.folds[f] = run_fold(data, plan, f, methods, config);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t f = next++; f < plan.k; f = next++) {
          try {
            result.folds[f] = run_fold(data, plan, f, methods, config);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  for (std::size_t m = 0; m < methods.size(); ++m) {
    ComparisonResult c;
    c.method = methods[m];
    for (const FoldOutcome& f : result.folds) c.folds.push_back(f.methods[m].test_metrics);
    c.summary = summarize(c.folds);
    result.comparisons.push_back(std::move(c));
  }
  return result;
}

}  // namespace covhess
