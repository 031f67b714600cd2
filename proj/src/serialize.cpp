#include "covhess/serialize.hpp"

#include <fstream>
#include <sstream>

#include "covhess/error.hpp"
#include "covhess/io.hpp"

namespace covhess {

namespace {

Json vector_json(std::span<const double> v) { return Json(std::vector<double>(v.begin(), v.end())); }

Vector vector_from(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw Error(ErrorCode::ParseError, std::string("missing array '") + key + "'");
  }
  return j.at(key).get<Vector>();
}

template <typename T>
T required(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

std::string_view optimizer_name(OptimizerKind k) { return k == OptimizerKind::Adam ? "adam" : "sgd"; }

}  // namespace

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json to_json(const NormalizationParams& params) {
  return Json{{"means", vector_json(params.means)}, {"stds", vector_json(params.stds)}};
}

NormalizationParams normalization_from_json(const Json& j) {
  NormalizationParams p{vector_from(j, "means"), vector_from(j, "stds")};
  if (p.means.size() != p.stds.size()) throw Error(ErrorCode::ParseError, "means and stds differ in length");
  return p;
}

Json to_json(const TrainConfig& c) {
  return Json{{"epochs", c.epochs},       {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
              {"optimizer", optimizer_name(c.optimizer)},
              {"beta1", c.beta1},         {"beta2", c.beta2},           {"epsilon", c.epsilon},
              {"seed", c.seed},           {"shuffle", c.shuffle}};
}

TrainConfig train_config_from_json(const Json& j) {
  TrainConfig c;
  c.epochs = required<std::size_t>(j, "epochs");
  c.batch_size = required<std::size_t>(j, "batch_size");
  c.learning_rate = required<double>(j, "learning_rate");
  const auto opt = required<std::string>(j, "optimizer");
  if (opt == "adam") c.optimizer = OptimizerKind::Adam;
  else if (opt == "sgd") c.optimizer = OptimizerKind::Sgd;
  else throw Error(ErrorCode::ParseError, "unknown optimizer '" + opt + "'");
  c.beta1 = required<double>(j, "beta1");
  c.beta2 = required<double>(j, "beta2");
  c.epsilon = required<double>(j, "epsilon");
  c.seed = required<std::uint64_t>(j, "seed");
  c.shuffle = required<bool>(j, "shuffle");
  return c;
}

Json to_json(const TrainReport& r) {
  return Json{{"initial_loss", r.initial_loss}, {"final_loss", r.final_loss}, {"epoch_losses", r.epoch_losses}};
}

Json to_json(const ModelBundle& b) {
  Json layers = Json::array();
  for (std::size_t l = 0; l < b.model.layer_count(); ++l) {
    const Matrix& w = b.model.weights[l];
    layers.push_back(Json{{"rows", w.rows()}, {"cols", w.cols()}, {"weights", w.data()}, {"biases", b.model.biases[l]}});
  }
  Json j{{"format", "covhess-mlp"},
         {"version", kModelFormatVersion},
         {"layer_dims", b.model.layer_dims},
         {"seed", b.model.seed},
         {"layers", std::move(layers)}};
  j["feature_names"] = b.feature_names;
  j["config"] = b.config ? to_json(*b.config) : Json(nullptr);
  j["normalization"] = b.normalization ? to_json(*b.normalization) : Json(nullptr);
  return j;
}

ModelBundle model_bundle_from_json(const Json& j) {
  if (!j.is_object() || j.value("format", "") != "covhess-mlp") {
    throw Error(ErrorCode::ParseError, "not a covhess model document");
  }
  const int version = required<int>(j, "version");
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::ParseError, "unsupported model version " + std::to_string(version));
  }
  ModelBundle b;
  b.model.layer_dims = required<std::vector<std::size_t>>(j, "layer_dims");
  b.model.seed = required<std::uint64_t>(j, "seed");
  const Json& layers = j.at("layers");
  for (const Json& layer : layers) {
    const auto rows = required<std::size_t>(layer, "rows");
    const auto cols = required<std::size_t>(layer, "cols");
    Vector w = vector_from(layer, "weights");
    if (w.size() != rows * cols) throw Error(ErrorCode::ParseError, "weight array size");
    b.model.weights.emplace_back(rows, cols, std::move(w));
    b.model.biases.push_back(vector_from(layer, "biases"));
  }
  try {
    validate(b.model);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, std::string("inconsistent model: ") + e.what());
  }
  if (j.contains("feature_names")) b.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  if (j.contains("config") && !j.at("config").is_null()) b.config = train_config_from_json(j.at("config"));
  if (j.contains("normalization") && !j.at("normalization").is_null()) {
    b.normalization = normalization_from_json(j.at("normalization"));
  }
  return b;
}

void save_model(const std::filesystem::path& path, const ModelBundle& bundle) {
  write_text_file(path, dump(to_json(bundle)));
}

ModelBundle load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingModel, "no model at " + path.string());
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return model_bundle_from_json(j);
}

Json to_json(const IsotropyReport& report, const std::array<std::string, 2>& label_names) {
  Json classes = Json::array();
  for (int c = 0; c < 2; ++c) {
    const ClassIsotropy& r = report[c];
    classes.push_back(Json{{"label", c},
                           {"name", label_names[c]},
                           {"avg_abs_diagonal", r.avg_abs_diagonal},
                           {"avg_abs_offdiagonal", r.avg_abs_offdiagonal},
                           {"diag_uniformity", r.diag_uniformity},
                           {"isotropy_score", r.isotropy_score}});
  }
  return Json{{"classes", std::move(classes)}};
}

Json to_json(const MetricsReport& m) {
  return Json{{"f1", m.f1},
              {"roc_auc", m.roc_auc},
              {"cohen_kappa", m.cohen_kappa},
              {"accuracy", m.accuracy},
              {"geometric_mean", m.geometric_mean},
              {"precision", m.precision},
              {"sensitivity", m.sensitivity},
              {"specificity", m.specificity},
              {"tp", m.tp},
              {"fp", m.fp},
              {"tn", m.tn},
              {"fn", m.fn}};
}

namespace {

Json summary_json(const MetricsReport& m) {
  Json j = to_json(m);
  for (const char* key : {"tp", "fp", "tn", "fn"}) j.erase(key);
  return j;
}

}  // namespace

Json to_json(const SpectrumDiagnostics& d) {
  Json j{{"eigenvalues", d.eigenvalues}, {"log10_gaps", d.log10_gaps}};
  if (std::isfinite(d.dominance_ratio)) {
    j["dominance_ratio"] = d.dominance_ratio;
    j["dominance_ratio_unbounded"] = false;
  } else {
    j["dominance_ratio"] = nullptr;
    j["dominance_ratio_unbounded"] = true;
  }
  j["first_eigenvalue_dominant"] = d.first_eigenvalue_dominant;
  return j;
}

Json report_json(const CvResult& result, const Json& meta) {
  Json methods = Json::array();
  for (const ComparisonResult& c : result.comparisons) {
    Json folds = Json::array();
    for (std::size_t f = 0; f < c.folds.size(); ++f) {
      Json entry = to_json(c.folds[f]);
      entry["fold"] = f;
      folds.push_back(std::move(entry));
    }
    methods.push_back(Json{{"method", to_string(c.method)},
                           {"folds", std::move(folds)},
                           {"mean", summary_json(c.summary.mean)},
                           {"std", summary_json(c.summary.stddev)}});
  }
  return Json{{"meta", meta}, {"k", result.k}, {"methods", std::move(methods)}};
}

std::string report_csv(const CvResult& result) {
  std::ostringstream out;
  out << "method,fold,f1,roc_auc,cohen_kappa,accuracy,geometric_mean,precision,sensitivity,specificity\n";
  auto row = [&](std::string_view method, const std::string& fold, const MetricsReport& m) {
    out << method << ',' << fold;
    for (double v : {m.f1, m.roc_auc, m.cohen_kappa, m.accuracy, m.geometric_mean, m.precision, m.sensitivity,
                     m.specificity}) {
      out << ',' << format_double(v);
    }
    out << '\n';
  };
  for (const ComparisonResult& c : result.comparisons) {
    for (std::size_t f = 0; f < c.folds.size(); ++f) row(to_string(c.method), std::to_string(f), c.folds[f]);
    row(to_string(c.method), "mean", c.summary.mean);
    row(to_string(c.method), "std", c.summary.stddev);
  }
  return out.str();
}

std::string spectrum_csv(std::span<const double> eigenvalues) {
  std::ostringstream out;
  out << "index,eigenvalue\n";
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) out << k + 1 << ',' << format_double(eigenvalues[k]) << '\n';
  return out.str();
}

std::string matrix_csv(const Matrix& m) {
  std::ostringstream out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_double(m(r, c));
    out << '\n';
  }
  return out.str();
}

Json curvature_json(const CurvatureMatrix& c, std::span<const double> eigenvalues) {
  return Json{{"method", to_string(c.method)},
              {"n_samples", c.n_samples},
              {"dimension", c.matrix.rows()},
              {"asymmetry", c.asymmetry},
              {"eigenvalues", vector_json(eigenvalues)}};
}

std::string grid_csv(const CombinationGrid& grid, GridField field) {
  std::ostringstream out;
  out << "i\\j";
  for (std::size_t j = 1; j <= grid.max_j; ++j) out << ',' << j;
  out << '\n';
  for (std::size_t i = 1; i <= grid.max_i; ++i) {
    out << i;
    for (std::size_t j = 1; j <= grid.max_j; ++j) {
      const SeparabilityCell& s = grid.at(i, j).stats;
      out << ',';
      switch (field) {
        case GridField::DSquared: out << format_double(s.d_squared); break;
        case GridField::WithinVariance: out << format_double(s.within_variance_sum); break;
        case GridField::LdaRatio:
          if (s.lda_ratio_unbounded) out << "unbounded";
          else out << format_double(s.lda_ratio);
          break;
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string projection_csv(const ProjectedData& data) {
  std::ostringstream out;
  const std::size_t k = data.points.cols();
  static constexpr const char* kNames[] = {"x", "y", "z"};
  for (std::size_t c = 0; c < k; ++c) out << (c < 3 ? kNames[c] : ("c" + std::to_string(c)).c_str()) << ',';
  out << "label\n";
  for (std::size_t r = 0; r < data.points.rows(); ++r) {
    for (std::size_t c = 0; c < k; ++c) out << format_double(data.points(r, c)) << ',';
    out << data.labels[r] << '\n';
  }
  return out.str();
}

std::string contributions_csv(std::span<const Contribution> rows) {
  std::ostringstream out;
  out << "rank,name,magnitude\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out << k + 1 << ',' << csv_escape(rows[k].name) << ',' << format_double(rows[k].magnitude) << '\n';
  }
  return out.str();
}

}  // namespace covhess
