#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covhess/io.hpp"
#include "covhess/linalg.hpp"

namespace covhess {

/// Binary-labelled feature table. Label 1 is the positive class.
struct Dataset {
  Matrix features;                         // n x D
  std::vector<int> labels;                 // 0 or 1, length n
  std::vector<std::string> feature_names;  // length D
  std::array<std::string, 2> label_names{"0", "1"};

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dims() const noexcept { return features.cols(); }
  std::array<std::size_t, 2> class_counts() const;
  bool has_both_classes() const;

  Dataset subset(std::span<const std::size_t> rows) const;
  /// Features of the rows with the given label.
  Matrix class_rows(int label) const;
};

/// Builds a dataset from in-memory parts, validating shapes and labels.
/// Empty `names` defaults to f0..f{D-1}.
Dataset make_dataset(Matrix features, std::vector<int> labels, std::vector<std::string> names = {});

enum class MissingPolicy { Median, Drop };

struct CsvOptions {
  std::string label_column;
  std::vector<std::string> categorical_columns;
  MissingPolicy missing_policy = MissingPolicy::Median;
  /// Raw label mapped to 1; otherwise the lexicographically larger label is 1.
  std::optional<std::string> positive_label;
};

/// Converts a parsed table: numeric columns pass through, categorical
/// columns become one indicator column per level (levels sorted), missing
/// cells ("" or "NA") are imputed (median / mode) or their rows dropped.
Dataset dataset_from_table(const CsvTable& table, const CsvOptions& options);
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options);

/// Writes features plus a trailing label column holding 0/1.
std::string dataset_to_csv(const Dataset& data, const std::string& label_column);

struct NormalizationParams {
  Vector means;
  Vector stds;  // population convention, all > 0
};

/// Per-column mean and population standard deviation.
NormalizationParams fit_zscore(const Dataset& train);
Dataset apply_zscore(const Dataset& data, const NormalizationParams& params);

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // fold index per sample
  bool stratified = true;
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_rows(std::size_t fold) const;
  std::vector<std::size_t> train_rows(std::size_t fold) const;
};

/// Deterministic k-fold plan. Stratified plans deal each class's shuffled
/// members round-robin, continuing the fold cursor across classes, so every
/// fold holds floor or ceil of (class size / k) members of each class.
FoldPlan make_folds(const Dataset& data, std::size_t k, bool stratified, std::uint64_t seed);

/// Checks plan/dataset consistency; throws FoldMismatch.
void validate_fold_plan(const FoldPlan& plan, std::size_t n);

}  // namespace covhess
