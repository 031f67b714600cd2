#include "covhess/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "covhess/error.hpp"
#include "covhess/random.hpp"

namespace covhess {

namespace {

bool is_missing(const std::string& cell) {
  std::string_view v = cell;
  while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
  while (!v.empty() && v.back() == ' ') v.remove_suffix(1);
  return v.empty() || v == "NA";
}

std::optional<double> parse_number(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

}  // namespace

std::array<std::size_t, 2> Dataset::class_counts() const {
  std::array<std::size_t, 2> counts{0, 0};
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

bool Dataset::has_both_classes() const {
  const auto c = class_counts();
  return c[0] > 0 && c[1] > 0;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features = select_rows(features, rows);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(labels[r]);
  out.feature_names = feature_names;
  out.label_names = label_names;
  return out;
}

Matrix Dataset::class_rows(int label) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) rows.push_back(i);
  return select_rows(features, rows);
}

Dataset make_dataset(Matrix features, std::vector<int> labels, std::vector<std::string> names) {
  if (features.rows() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(features.rows()) + " rows vs " +
                                               std::to_string(labels.size()) + " labels");
  }
  for (int l : labels)
    if (l != 0 && l != 1) throw Error(ErrorCode::NonBinaryLabel, "label " + std::to_string(l));
  if (names.empty()) {
    for (std::size_t j = 0; j < features.cols(); ++j) names.push_back("f" + std::to_string(j));
  }
  if (names.size() != features.cols()) throw Error(ErrorCode::LengthMismatch, "feature name count");
  Dataset d;
  d.features = std::move(features);
  d.labels = std::move(labels);
  d.feature_names = std::move(names);
  return d;
}

Dataset dataset_from_table(const CsvTable& table, const CsvOptions& options) {
  const auto& header = table.header;
  auto find_column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::MissingColumn, "column '" + name + "' not in header");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t label_col = find_column(options.label_column);
  std::set<std::size_t> categorical;
  for (const auto& name : options.categorical_columns) categorical.insert(find_column(name));

  // Rows kept after the missing-data policy.
  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (is_missing(row[label_col])) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(r + 1) + ", column " +
                                             std::to_string(label_col + 1) + ": missing label");
    }
    bool drop = false;
    if (options.missing_policy == MissingPolicy::Drop) {
      for (std::size_t c = 0; c < row.size(); ++c)
        if (c != label_col && is_missing(row[c])) drop = true;
    }
    if (!drop) kept.push_back(r);
  }
  if (kept.empty()) throw Error(ErrorCode::EmptyDataset, "no data rows");

  std::set<std::string> raw_labels;
  for (std::size_t r : kept) raw_labels.insert(table.rows[r][label_col]);
  if (raw_labels.size() != 2) {
    throw Error(ErrorCode::NonBinaryLabel, "label column '" + options.label_column + "' has " +
                                               std::to_string(raw_labels.size()) + " distinct values");
  }
  std::array<std::string, 2> label_names{*raw_labels.begin(), *raw_labels.rbegin()};
  if (options.positive_label) {
    if (!raw_labels.contains(*options.positive_label)) {
      throw Error(ErrorCode::NonBinaryLabel, "positive label '" + *options.positive_label + "' not present");
    }
    if (label_names[0] == *options.positive_label) std::swap(label_names[0], label_names[1]);
  }

  std::vector<std::vector<double>> columns;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col) continue;
    if (categorical.contains(c)) {
      std::map<std::string, std::size_t> level_counts;
      for (std::size_t r : kept)
        if (!is_missing(table.rows[r][c])) ++level_counts[table.rows[r][c]];
      if (level_counts.empty()) throw Error(ErrorCode::ParseError, "column '" + header[c] + "' is entirely missing");
      // Mode; map order breaks ties toward the smallest level.
      std::string mode = level_counts.begin()->first;
      for (const auto& [level, count] : level_counts)
        if (count > level_counts[mode]) mode = level;
      for (const auto& [level, count] : level_counts) {
        std::vector<double> indicator;
        indicator.reserve(kept.size());
        for (std::size_t r : kept) {
          const std::string& cell = is_missing(table.rows[r][c]) ? mode : table.rows[r][c];
          indicator.push_back(cell == level ? 1.0 : 0.0);
        }
        columns.push_back(std::move(indicator));
        names.push_back(header[c] + "=" + level);
      }
      continue;
    }
    std::vector<double> values(kept.size(), 0.0);
    std::vector<double> present;
    std::vector<std::size_t> holes;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      const std::string& cell = table.rows[kept[i]][c];
      if (is_missing(cell)) {
        holes.push_back(i);
        continue;
      }
      auto v = parse_number(cell);
      if (!v) {
        throw Error(ErrorCode::ParseError, "row " + std::to_string(kept[i] + 1) + ", column " +
                                               std::to_string(c + 1) + " ('" + header[c] + "'): '" + cell +
                                               "' is not numeric");
      }
      values[i] = *v;
      present.push_back(*v);
    }
    if (!holes.empty()) {
      if (present.empty()) throw Error(ErrorCode::ParseError, "column '" + header[c] + "' is entirely missing");
      const double fill = median(present);
      for (std::size_t i : holes) values[i] = fill;
    }
    columns.push_back(std::move(values));
    names.push_back(header[c]);
  }

  Matrix features(kept.size(), columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) features.set_column(j, columns[j]);
  std::vector<int> labels;
  labels.reserve(kept.size());
  for (std::size_t r : kept) labels.push_back(table.rows[r][label_col] == label_names[1] ? 1 : 0);

  Dataset d = make_dataset(std::move(features), std::move(labels), std::move(names));
  d.label_names = label_names;
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  return dataset_from_table(read_csv_file(path), options);
}

std::string dataset_to_csv(const Dataset& data, const std::string& label_column) {
  std::ostringstream out;
  for (const auto& name : data.feature_names) out << csv_escape(name) << ',';
  out << csv_escape(label_column) << '\n';
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (double v : data.features.row(r)) out << format_double(v) << ',';
    out << data.labels[r] << '\n';
  }
  return out.str();
}

NormalizationParams fit_zscore(const Dataset& train) {
  const Matrix& x = train.features;
  if (x.rows() == 0) throw Error(ErrorCode::EmptyDataset, "fit_zscore on empty split");
  NormalizationParams p;
  p.means = column_means(x);
  p.stds.assign(x.cols(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double d = row[c] - p.means[c];
      p.stds[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < x.cols(); ++c) {
    p.stds[c] = std::sqrt(p.stds[c] / static_cast<double>(x.rows()));
    if (!(p.stds[c] > 1e-14 * std::max(1.0, std::abs(p.means[c])))) {
      const std::string name = c < train.feature_names.size() ? train.feature_names[c] : "f" + std::to_string(c);
      throw Error(ErrorCode::ZeroVarianceColumn, name);
    }
  }
  return p;
}

Dataset apply_zscore(const Dataset& data, const NormalizationParams& params) {
  if (params.means.size() != data.dims() || params.stds.size() != data.dims()) {
    throw Error(ErrorCode::DimensionMismatch, "normalization has " + std::to_string(params.means.size()) +
                                                  " columns, data has " + std::to_string(data.dims()));
  }
  Dataset out = data;
  for (std::size_t r = 0; r < out.size(); ++r) {
    auto row = out.features.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - params.means[c]) / params.stds[c];
  }
  return out;
}

std::vector<std::size_t> FoldPlan::test_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) rows.push_back(i);
  return rows;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) rows.push_back(i);
  return rows;
}

FoldPlan make_folds(const Dataset& data, std::size_t k, bool stratified, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be at least 2");
  const std::size_t n = data.size();
  FoldPlan plan;
  plan.k = k;
  plan.stratified = stratified;
  plan.seed = seed;
  plan.assignments.assign(n, 0);
  Rng rng(seed);

  std::vector<std::vector<std::size_t>> groups;
  if (stratified) {
    groups.resize(2);
    for (std::size_t i = 0; i < n; ++i) groups[static_cast<std::size_t>(data.labels[i])].push_back(i);
    for (int c = 0; c < 2; ++c) {
      if (groups[c].size() < k) {
        throw Error(ErrorCode::TooFewClassMembers, "class " + std::to_string(c) + " has " +
                                                       std::to_string(groups[c].size()) + " members for k=" +
                                                       std::to_string(k));
      }
    }
  } else {
    if (n < k) throw Error(ErrorCode::TooFewSamples, std::to_string(n) + " samples for k=" + std::to_string(k));
    groups.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i) groups[0][i] = i;
  }

  std::size_t cursor = 0;
  for (auto& group : groups) {
    rng.shuffle(std::span<std::size_t>(group));
    for (std::size_t idx : group) {
      plan.assignments[idx] = cursor;
      cursor = (cursor + 1) % k;
    }
  }
  return plan;
}

void validate_fold_plan(const FoldPlan& plan, std::size_t n) {
  if (plan.k < 2) throw Error(ErrorCode::FoldMismatch, "plan has k=" + std::to_string(plan.k));
  if (plan.assignments.size() != n) {
    throw Error(ErrorCode::FoldMismatch, "plan covers " + std::to_string(plan.assignments.size()) +
                                             " samples, dataset has " + std::to_string(n));
  }
  std::vector<std::size_t> sizes(plan.k, 0);
  for (std::size_t a : plan.assignments) {
    if (a >= plan.k) throw Error(ErrorCode::FoldMismatch, "fold index " + std::to_string(a) + " >= k");
    ++sizes[a];
  }
  for (std::size_t f = 0; f < plan.k; ++f)
    if (sizes[f] == 0) throw Error(ErrorCode::FoldMismatch, "fold " + std::to_string(f) + " is empty");
}

}  // namespace covhess
