#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "covhess/curvature.hpp"
#include "covhess/dataset.hpp"
#include "covhess/evaluation.hpp"
#include "covhess/mlp.hpp"
#include "covhess/projection.hpp"
#include "covhess/separability.hpp"

namespace covhess {

using Json = nlohmann::ordered_json;

inline constexpr int kModelFormatVersion = 1;

/// Everything stored alongside a trained network.
struct ModelBundle {
  MlpModel model;
  std::optional<TrainConfig> config;
  std::optional<NormalizationParams> normalization;
  std::vector<std::string> feature_names;
};

Json to_json(const NormalizationParams& params);
NormalizationParams normalization_from_json(const Json& j);

Json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const Json& j);

Json to_json(const TrainReport& report);

Json to_json(const ModelBundle& bundle);
/// Throws ParseError on a malformed or wrong-version document.
ModelBundle model_bundle_from_json(const Json& j);

void save_model(const std::filesystem::path& path, const ModelBundle& bundle);
/// Throws MissingModel when the file does not exist.
ModelBundle load_model(const std::filesystem::path& path);

Json to_json(const IsotropyReport& report, const std::array<std::string, 2>& label_names);
Json to_json(const MetricsReport& m);
Json to_json(const SpectrumDiagnostics& diag);

/// Per-method per-fold metrics plus mean and standard deviation.
Json report_json(const CvResult& result, const Json& meta);
/// One row per (method, fold) and per (method, mean|std).
std::string report_csv(const CvResult& result);

/// index,eigenvalue
std::string spectrum_csv(std::span<const double> eigenvalues);
/// D x D, no header.
std::string matrix_csv(const Matrix& m);
Json curvature_json(const CurvatureMatrix& c, std::span<const double> eigenvalues);

enum class GridField { DSquared, WithinVariance, LdaRatio };
/// First row "i\j,1,..,J"; each row starts with i. Unbounded LDA ratios are
/// written as the token `unbounded`.
std::string grid_csv(const CombinationGrid& grid, GridField field);

/// x,y,label for 2-column data; x,label for 1 column.
std::string projection_csv(const ProjectedData& data);

/// rank,name,magnitude
std::string contributions_csv(std::span<const Contribution> rows);

/// Pretty JSON text terminated by a newline.
std::string dump(const Json& j);

}  // namespace covhess
