#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "covhess/curvature.hpp"
#include "covhess/dataset.hpp"
#include "covhess/error.hpp"
#include "covhess/evaluation.hpp"
#include "covhess/io.hpp"
#include "covhess/mlp.hpp"
#include "covhess/projection.hpp"
#include "covhess/separability.hpp"
#include "covhess/serialize.hpp"
#include "covhess/svg.hpp"
#include "covhess/verification.hpp"

namespace fs = std::filesystem;
using namespace covhess;

namespace {

struct RunConfig {
  std::string data;
  std::string label_column;
  std::string categorical;
  std::string missing = "median";
  std::string positive_label;
  std::string out = "out";
  std::string model;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::string optimizer = "adam";
  std::string hidden = "64,32,16";
  std::string curvature = "fisher";

  std::size_t grid = 3;
  std::size_t k = 10;
  bool stratified = true;
  std::string methods = "pca,lda,hessian_only,proposed,dnn_full";
  double svm_lambda = 1e-2;
  std::size_t svm_epochs = 2000;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<std::size_t> parse_hidden(const std::string& text) {
  std::vector<std::size_t> out;
  for (const std::string& s : split_list(text)) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || v <= 0) throw Error(ErrorCode::InvalidArgument, "bad hidden layer width '" + s + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

Dataset load_dataset(const RunConfig& rc) {
  if (rc.data.empty()) throw Error(ErrorCode::InvalidArgument, "no dataset given (--data)");
  if (rc.label_column.empty()) throw Error(ErrorCode::MissingColumn, "no label column given (--label-column)");
  if (!fs::exists(rc.data)) throw Error(ErrorCode::IoError, "dataset not found: " + rc.data);
  CsvOptions opts;
  opts.label_column = rc.label_column;
  opts.categorical_columns = split_list(rc.categorical);
  if (rc.missing == "median") opts.missing_policy = MissingPolicy::Median;
  else if (rc.missing == "drop") opts.missing_policy = MissingPolicy::Drop;
  else throw Error(ErrorCode::InvalidArgument, "missing policy must be median or drop");
  if (!rc.positive_label.empty()) opts.positive_label = rc.positive_label;
  return load_csv(rc.data, opts);
}

TrainConfig train_config(const RunConfig& rc) {
  TrainConfig tc;
  tc.epochs = rc.epochs;
  tc.batch_size = rc.batch_size;
  tc.learning_rate = rc.learning_rate;
  if (rc.optimizer == "adam") tc.optimizer = OptimizerKind::Adam;
  else if (rc.optimizer == "sgd") tc.optimizer = OptimizerKind::Sgd;
  else throw Error(ErrorCode::InvalidArgument, "optimizer must be adam or sgd");
  tc.seed = rc.seed;
  validate(tc);
  return tc;
}

fs::path model_path(const RunConfig& rc) { return rc.model.empty() ? fs::path(rc.out) / "model.json" : fs::path(rc.model); }

/// Loads the trained bundle and the dataset normalized with its parameters.
std::pair<ModelBundle, Dataset> load_model_and_data(const RunConfig& rc) {
  ModelBundle bundle = load_model(model_path(rc));
  Dataset raw = load_dataset(rc);
  if (raw.dims() != bundle.model.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(bundle.model.input_dim()) +
                                                  " features, dataset has " + std::to_string(raw.dims()));
  }
  const NormalizationParams params = bundle.normalization ? *bundle.normalization : fit_zscore(raw);
  return {std::move(bundle), apply_zscore(raw, params)};
}

void write(const fs::path& path, const std::string& text) {
  write_text_file(path, text);
  std::cout << "wrote " << path.string() << "\n";
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------- commands

int cmd_preprocess(const RunConfig& rc) {
  const Dataset raw = load_dataset(rc);
  const NormalizationParams params = fit_zscore(raw);
  const Dataset norm = apply_zscore(raw, params);
  const IsotropyReport iso = isotropy_report(norm);
  const fs::path out(rc.out);
  write(out / "normalized.csv", dataset_to_csv(norm, rc.label_column));
  write(out / "normalization.json", dump(to_json(params)));
  write(out / "isotropy.json", dump(to_json(iso, norm.label_names)));
  for (int c = 0; c < 2; ++c) {
    std::cout << "class " << c << " (" << norm.label_names[c] << "): avg |diag| "
              << fixed(iso[c].avg_abs_diagonal) << ", avg |offdiag| " << fixed(iso[c].avg_abs_offdiagonal) << "\n";
  }
  return 0;
}

int cmd_train(const RunConfig& rc) {
  const Dataset raw = load_dataset(rc);
  const NormalizationParams params = fit_zscore(raw);
  const Dataset data = apply_zscore(raw, params);
  const TrainConfig tc = train_config(rc);
  const auto hidden = parse_hidden(rc.hidden);
  const CurvatureMethod method = parse_curvature_method(rc.curvature);

  TrainResult result = train(init_mlp(data.dims(), hidden, rc.seed), data, tc);
  const fs::path out(rc.out);
  ModelBundle bundle{result.model, tc, params, data.feature_names};
  save_model(model_path(rc), bundle);
  std::cout << "wrote " << model_path(rc).string() << "\n";
  write(out / "train_report.json", dump(to_json(result.report)));

  const EigenDecomposition cov_eig = sym_eigen(covariance(data.features, CovarianceBias::Sample));
  const CurvatureMatrix curv = compute_curvature(result.model, data, method);
  const EigenDecomposition curv_eig = sym_eigen(curv.matrix);
  const SpectrumDiagnostics cov_diag = eigenspectrum_report(cov_eig);
  const SpectrumDiagnostics curv_diag = eigenspectrum_report(curv_eig);

  write(out / "spectra" / "covariance.csv", spectrum_csv(cov_eig.eigenvalues));
  write(out / "spectra" / "curvature.csv", spectrum_csv(curv_eig.eigenvalues));
  write(out / "spectra" / "curvature_matrix.csv", matrix_csv(curv.matrix));
  write(out / "spectra" / "curvature.json", dump(curvature_json(curv, curv_eig.eigenvalues)));
  write(out / "spectra" / "diagnostics.json",
        dump(Json{{"covariance", to_json(cov_diag)}, {"curvature", to_json(curv_diag)}}));

  svg::LineChart spectra{"Eigenspectra", "eigenvalue index", "eigenvalue", true,
                         {{"covariance", cov_eig.eigenvalues}, {std::string(to_string(method)), curv_eig.eigenvalues}}};
  write(out / "figures" / "eigenspectra.svg", svg::render(spectra));
  if (!result.report.epoch_losses.empty()) {
    svg::LineChart loss{"Training loss", "epoch", "summed BCE", true, {{"loss", result.report.epoch_losses}}};
    write(out / "figures" / "loss.svg", svg::render(loss));
  }

  std::cout << "final loss " << result.report.final_loss << "\n"
            << "covariance lambda1/lambda2 " << cov_diag.dominance_ratio << " (dominant "
            << (cov_diag.first_eigenvalue_dominant ? "yes" : "no") << ")\n"
            << "curvature lambda1/lambda2 " << curv_diag.dominance_ratio << " (dominant "
            << (curv_diag.first_eigenvalue_dominant ? "yes" : "no") << ")\n";
  return 0;
}

int cmd_heatmap(const RunConfig& rc) {
  const auto [bundle, data] = load_model_and_data(rc);
  const CurvatureMethod method = parse_curvature_method(rc.curvature);
  const EigenDecomposition cov_eig = sym_eigen(covariance(data.features, CovarianceBias::Sample));
  const EigenDecomposition curv_eig = sym_eigen(compute_curvature(bundle.model, data, method).matrix);
  const CombinationGrid grid = combination_grid(data.features, data.labels, cov_eig, curv_eig, rc.grid, rc.grid);

  const fs::path out(rc.out);
  write(out / "heatmap" / "d_squared.csv", grid_csv(grid, GridField::DSquared));
  write(out / "heatmap" / "within_variance.csv", grid_csv(grid, GridField::WithinVariance));
  write(out / "heatmap" / "lda_ratio.csv", grid_csv(grid, GridField::LdaRatio));
  for (std::size_t i = 1; i <= grid.max_i; ++i) {
    for (std::size_t j = 1; j <= grid.max_j; ++j) {
      const GridCell& cell = grid.at(i, j);
      const std::string tag = std::to_string(i) + "_" + std::to_string(j);
      svg::ScatterPlot plot;
      plot.title = "covariance v" + std::to_string(i) + " vs curvature v" + std::to_string(j);
      plot.x_label = "covariance v" + std::to_string(i);
      plot.y_label = "curvature v" + std::to_string(j);
      plot.points = cell.projection.points;
      plot.labels = cell.projection.labels;
      plot.legend = {data.label_names[0], data.label_names[1], "d^2 " + fixed(cell.stats.d_squared),
                     "within var " + fixed(cell.stats.within_variance_sum),
                     "LDA ratio " + (cell.stats.lda_ratio_unbounded ? std::string("unbounded")
                                                                    : fixed(cell.stats.lda_ratio))};
      write(out / "figures" / ("projection_" + tag + ".svg"), svg::render(plot));
    }
  }
  const auto [bi, bj] = grid.argmax_lda_ratio();
  std::cout << "highest LDA ratio at (" << bi << "," << bj << ")\n";
  return 0;
}

int cmd_compare(const RunConfig& rc) {
  const Dataset data = load_dataset(rc);
  std::vector<Method> methods;
  for (const std::string& name : split_list(rc.methods)) methods.push_back(parse_method(name));
  if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "no methods given");

  CvConfig cv;
  cv.train = train_config(rc);
  cv.hidden = parse_hidden(rc.hidden);
  cv.baseline.curvature = parse_curvature_method(rc.curvature);
  cv.baseline.svm.lambda = rc.svm_lambda;
  cv.baseline.svm.epochs = rc.svm_epochs;
  cv.baseline.svm.seed = rc.seed;
  cv.threads = rc.threads;
  const FoldPlan plan = make_folds(data, rc.k, rc.stratified, rc.seed);
  const CvResult result = cross_validate(data, plan, methods, cv);

  Json meta{{"dataset", fs::path(rc.data).filename().string()},
            {"n", data.size()},
            {"dims", data.dims()},
            {"seed", rc.seed},
            {"stratified", rc.stratified},
            {"curvature", to_string(cv.baseline.curvature)},
            {"hidden", cv.hidden},
            {"train", to_json(cv.train)},
            {"svm", Json{{"lambda", cv.baseline.svm.lambda}, {"epochs", cv.baseline.svm.epochs}}}};
  const fs::path out(rc.out);
  write(out / "report.json", dump(report_json(result, meta)));
  write(out / "report.csv", report_csv(result));

  // Decision boundaries from the first fold, train and test side by side.
  const FoldOutcome& fold = result.folds.front();
  for (const BaselineOutcome& b : fold.methods) {
    if (!b.svm) continue;
    const std::string name(to_string(b.method));
    for (const bool is_train : {true, false}) {
      const ProjectedData& proj = is_train ? b.train_projection : b.test_projection;
      const MetricsReport& m = is_train ? b.train_metrics : b.test_metrics;
      svg::ScatterPlot plot;
      plot.title = name + (is_train ? " (train, fold 0)" : " (test, fold 0)");
      plot.x_label = "component 1";
      plot.y_label = proj.points.cols() > 1 ? "component 2" : "";
      plot.points = proj.points;
      plot.labels = proj.labels;
      plot.boundary = svg::Boundary{b.svm->weights[0], b.svm->weights.size() > 1 ? b.svm->weights[1] : 0.0,
                                    b.svm->bias};
      plot.legend = {data.label_names[0], data.label_names[1], "F1 " + fixed(m.f1)};
      write(out / "figures" / (name + (is_train ? "_train.svg" : "_test.svg")), svg::render(plot));
    }
  }

  for (const ComparisonResult& c : result.comparisons) {
    std::cout << to_string(c.method) << ": F1 " << fixed(c.summary.mean.f1) << " +- " << fixed(c.summary.stddev.f1)
              << ", AUC " << fixed(c.summary.mean.roc_auc) << ", kappa " << fixed(c.summary.mean.cohen_kappa)
              << "\n";
  }
  return 0;
}

int cmd_contributions(const RunConfig& rc) {
  const auto [bundle, data] = load_model_and_data(rc);
  const CurvatureMethod method = parse_curvature_method(rc.curvature);
  const EigenDecomposition cov_eig = sym_eigen(covariance(data.features, CovarianceBias::Sample));
  const EigenDecomposition curv_eig = sym_eigen(compute_curvature(bundle.model, data, method).matrix);
  const fs::path out(rc.out);
  const std::pair<const char*, const EigenDecomposition*> parts[] = {{"covariance", &cov_eig},
                                                                     {"curvature", &curv_eig}};
  for (const auto& [name, eig] : parts) {
    const auto rows = parameter_contributions(eig->eigenvectors.column(0), data.feature_names);
    write(out / "contributions" / (std::string(name) + "_v1.csv"), contributions_csv(rows));
    svg::BarChart chart;
    chart.title = std::string("Contributions to the leading ") + name + " eigenvector";
    for (const Contribution& c : rows) {
      chart.names.push_back(c.name);
      chart.values.push_back(c.magnitude);
    }
    write(out / "figures" / ("contributions_" + std::string(name) + ".svg"), svg::render(chart));
  }
  return 0;
}

int cmd_verify(const RunConfig& rc, bool write_json) {
  const auto checks = run_identity_checks(rc.seed);
  bool ok = true;
  Json arr = Json::array();
  for (const IdentityCheck& c : checks) {
    std::printf("%-28s cases=%-5zu %s=%.3e  %s %.1e  %s\n", c.name.c_str(), c.cases,
                c.lower_bound ? "min" : "max_residual", c.max_residual, c.lower_bound ? ">=" : "<", c.tolerance,
                c.passed() ? "PASS" : "FAIL");
    ok = ok && c.passed();
    arr.push_back(Json{{"name", c.name}, {"cases", c.cases}, {"value", c.max_residual},
                       {"tolerance", c.tolerance}, {"lower_bound", c.lower_bound}, {"passed", c.passed()}});
  }
  if (write_json) write(fs::path(rc.out) / "theorems.json", dump(Json{{"seed", rc.seed}, {"checks", arr}}));
  return ok ? 0 : 3;
}

bool flag_on_command_line(int argc, char** argv, std::string_view flag) {
  for (int i = 1; i < argc; ++i) {
    const std::string_view a(argv[i]);
    if (a == flag || (a.size() > flag.size() && a.substr(0, flag.size()) == flag && a[flag.size()] == '=')) return true;
  }
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariance and curvature eigenvector projections for binary classification"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key = value configuration file; command-line flags take precedence");

  RunConfig rc;
  app.add_option("--data", rc.data, "Input CSV file");
  app.add_option("--label-column,--label_column", rc.label_column, "Name of the label column");
  app.add_option("--categorical", rc.categorical, "Comma-separated categorical columns to one-hot encode");
  app.add_option("--missing", rc.missing, "Missing-value policy: median or drop");
  app.add_option("--positive-label,--positive_label", rc.positive_label, "Raw label value mapped to class 1");
  app.add_option("--out", rc.out, "Output directory");
  app.add_option("--model", rc.model, "Model file (default <out>/model.json)");
  app.add_option("--seed", rc.seed, "Global seed; COVHESS_SEED overrides the config file value");
  app.add_option("--threads", rc.threads, "Parallel folds")->check(CLI::PositiveNumber);
  app.add_option("--epochs", rc.epochs, "Training epochs");
  app.add_option("--batch-size,--batch_size", rc.batch_size, "Minibatch size");
  app.add_option("--learning-rate,--learning_rate", rc.learning_rate, "Learning rate");
  app.add_option("--optimizer", rc.optimizer, "adam or sgd");
  app.add_option("--hidden", rc.hidden, "Comma-separated hidden layer widths");
  app.add_option("--curvature", rc.curvature, "fisher or exact_hessian");
  app.add_option("--grid", rc.grid, "Heatmap grid size (first N eigenvectors of each matrix)");
  app.add_option("--k", rc.k, "Number of cross-validation folds");
  app.add_option("--stratified", rc.stratified, "Stratify folds by class (true/false)");
  app.add_option("--methods", rc.methods, "Comma-separated methods: pca,lda,hessian_only,proposed,dnn_full");
  app.add_option("--svm-lambda,--svm_lambda", rc.svm_lambda, "SVM regularization");
  app.add_option("--svm-epochs,--svm_epochs", rc.svm_epochs, "SVM epochs");

  auto* preprocess = app.add_subcommand("preprocess", "Z-score the dataset and report class isotropy");
  auto* train_cmd = app.add_subcommand("train", "Train the network and write eigenspectra");
  auto* heatmap = app.add_subcommand("heatmap", "Separability grids over eigenvector pairs");
  auto* compare = app.add_subcommand("compare", "Cross-validated comparison of projection methods");
  auto* contributions = app.add_subcommand("contributions", "Feature contributions to the leading eigenvectors");
  auto* verify = app.add_subcommand("verify-theorems", "Randomized checks of the separability identities");
  bool verify_json = false;
  verify->add_flag("--json", verify_json, "Also write <out>/theorems.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (!flag_on_command_line(argc, argv, "--seed")) {
    if (const char* env = std::getenv("COVHESS_SEED")) {
      try {
        rc.seed = std::stoull(env);
      } catch (const std::exception&) {
        std::cerr << "InvalidArgument: COVHESS_SEED is not an unsigned integer\n";
        return 2;
      }
    }
  }

  try {
    if (*preprocess) return cmd_preprocess(rc);
    if (*train_cmd) return cmd_train(rc);
    if (*heatmap) return cmd_heatmap(rc);
    if (*compare) return cmd_compare(rc);
    if (*contributions) return cmd_contributions(rc);
    if (*verify) return cmd_verify(rc, verify_json);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_numerical(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
