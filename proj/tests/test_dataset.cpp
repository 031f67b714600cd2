#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "covhess/dataset.hpp"
#include "covhess/error.hpp"
#include "covhess/io.hpp"
#include "covhess/random.hpp"

using namespace covhess;

namespace {

Dataset from_text(const std::string& text, CsvOptions opts) {
  std::istringstream in(text);
  return dataset_from_table(parse_csv(in), opts);
}

CsvOptions label(const std::string& col) {
  CsvOptions o;
  o.label_column = col;
  return o;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no covhess::Error thrown";
  return ErrorCode::InvalidArgument;
}

Dataset synthetic(std::size_t n, std::size_t positives, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, d);
  std::vector<int> y(n, 0);
  for (std::size_t i = 0; i < positives; ++i) y[i] = 1;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) x(r, c) = rng.normal(y[r] ? 1.0 : 0.0, 1.0);
  return make_dataset(std::move(x), std::move(y));
}

}  // namespace

TEST(Csv, QuotesCrlfAndBom) {
  std::istringstream in("\xEF\xBB\xBF" "a,\"b,c\",d\r\n1,\"say \"\"hi\"\"\",3\r\n\r\n4,5,6\n");
  const CsvTable t = parse_csv(in);
  ASSERT_EQ(t.header.size(), 3u);
  EXPECT_EQ(t.header[0], "a");
  EXPECT_EQ(t.header[1], "b,c");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][1], "say \"hi\"");
  EXPECT_EQ(t.rows[1][2], "6");
}

TEST(Csv, RaggedRowIsParseError) {
  EXPECT_EQ(code_of([] {
              std::istringstream in("a,b\n1,2,3\n");
              parse_csv(in);
            }),
            ErrorCode::ParseError);
}

TEST(LoadCsv, OneHotExpandsCategoricalColumn) {
  CsvOptions o = label("y");
  o.categorical_columns = {"color"};
  const Dataset d = from_text("x,color,y\n1,red,a\n2,blue,b\n3,red,a\n", o);
  EXPECT_EQ(d.dims(), 3u);
  EXPECT_EQ(d.size(), 3u);
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"x", "color=blue", "color=red"}));
  EXPECT_EQ(d.features(1, 1), 1.0);
  EXPECT_EQ(d.features(1, 2), 0.0);
  EXPECT_EQ(d.labels, (std::vector<int>{0, 1, 0}));
}

TEST(LoadCsv, MedianImputation) {
  const Dataset d = from_text("x,y\n1,0\n7,1\nNA,0\n3,1\n10,0\n", label("y"));
  EXPECT_EQ(d.features(2, 0), 5.0);
}

TEST(LoadCsv, DropPolicyRemovesRows) {
  CsvOptions o = label("y");
  o.missing_policy = MissingPolicy::Drop;
  const Dataset d = from_text("x,y\n1,0\n,1\n3,1\n", o);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.features(1, 0), 3.0);
}

TEST(LoadCsv, Errors) {
  EXPECT_EQ(code_of([] { from_text("x,y\n1,a\n2,b\n3,c\n", label("y")); }), ErrorCode::NonBinaryLabel);
  EXPECT_EQ(code_of([] { from_text("x,y\n1,a\nfoo,b\n", label("y")); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { from_text("x,y\n1,a\n2,b\n", label("label")); }), ErrorCode::MissingColumn);
  EXPECT_EQ(code_of([] { from_text("x,y\n", label("y")); }), ErrorCode::EmptyDataset);
}

TEST(LoadCsv, PositiveLabelOverride) {
  CsvOptions o = label("y");
  o.positive_label = "a";
  const Dataset d = from_text("x,y\n1,a\n2,b\n", o);
  EXPECT_EQ(d.labels, (std::vector<int>{1, 0}));
}

TEST(LoadCsv, Wbcd) {
  CsvOptions o = label("diagnosis");
  const Dataset d = load_csv(std::string(COVHESS_DATA_DIR) + "/wbcd.csv", o);
  EXPECT_EQ(d.size(), 569u);
  EXPECT_EQ(d.dims(), 30u);
  EXPECT_EQ(d.class_counts()[0], 357u);
  EXPECT_EQ(d.class_counts()[1], 212u);
  EXPECT_EQ(d.label_names[1], "M");
}

TEST(ZScore, HandOracleAndErrors) {
  const Dataset d = make_dataset(Matrix{{0}, {2}}, {0, 1});
  const NormalizationParams p = fit_zscore(d);
  EXPECT_EQ(p.means[0], 1.0);
  EXPECT_EQ(p.stds[0], 1.0);
  EXPECT_EQ(code_of([] { fit_zscore(make_dataset(Matrix{{3, 1}, {3, 2}}, {0, 1})); }), ErrorCode::ZeroVarianceColumn);
  EXPECT_EQ(code_of([&] { apply_zscore(make_dataset(Matrix{{1, 2}}, {0}), p); }), ErrorCode::DimensionMismatch);
}

TEST(ZScore, FittingSplitIsStandardizedAndIdempotent) {
  const Dataset d = synthetic(50, 20, 4, 3);
  const Dataset z = apply_zscore(d, fit_zscore(d));
  const NormalizationParams again = fit_zscore(z);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_NEAR(again.means[c], 0.0, 1e-10);
    EXPECT_NEAR(again.stds[c], 1.0, 1e-10);
  }
  const Dataset zz = apply_zscore(z, again);
  for (std::size_t i = 0; i < z.features.data().size(); ++i)
    EXPECT_NEAR(zz.features.data()[i], z.features.data()[i], 1e-9);
}

TEST(ZScore, WithinClassVarianceScaling) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 30;
    Matrix x(2 * n, 1);
    std::vector<int> y(2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i) {
      y[i] = i >= n;
      x(i, 0) = rng.normal(y[i] ? 3.0 : 0.0, y[i] ? 2.0 : 0.7);
    }
    const Dataset d = make_dataset(x, y);
    const NormalizationParams p = fit_zscore(d);
    const Dataset z = apply_zscore(d, p);
    for (int c = 0; c < 2; ++c) {
      const Matrix raw = d.class_rows(c);
      const Matrix scaled = z.class_rows(c);
      auto var = [](const Matrix& m) {
        double mean = 0, s = 0;
        for (double v : m.data()) mean += v;
        mean /= m.rows();
        for (double v : m.data()) s += (v - mean) * (v - mean);
        return s / m.rows();
      };
      EXPECT_NEAR(var(scaled), var(raw) / (p.stds[0] * p.stds[0]), 1e-10);
    }
  }
}

TEST(ZScore, TestSplitMeansAreNotForcedToZero) {
  const Dataset d = synthetic(60, 30, 3, 8);
  const FoldPlan plan = make_folds(d, 3, true, 1);
  const Dataset train = d.subset(plan.train_rows(0));
  const Dataset test = apply_zscore(d.subset(plan.test_rows(0)), fit_zscore(train));
  const Vector m = column_means(test.features);
  double largest = 0;
  for (double v : m) largest = std::max(largest, std::abs(v));
  EXPECT_GT(largest, 1e-3);
}

TEST(Folds, BalancedExactDivision) {
  const Dataset d = synthetic(10, 5, 1, 1);
  const FoldPlan plan = make_folds(d, 5, true, 42);
  for (std::size_t f = 0; f < 5; ++f) {
    const auto rows = plan.test_rows(f);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(d.labels[rows[0]] + d.labels[rows[1]], 1);
  }
}

TEST(Folds, ImbalancedStratification) {
  const Dataset d = synthetic(221, 31, 2, 2);
  for (std::uint64_t seed : {0u, 1u, 2u, 3u}) {
    const FoldPlan plan = make_folds(d, 5, true, seed);
    std::size_t total = 0;
    for (std::size_t f = 0; f < 5; ++f) {
      const auto rows = plan.test_rows(f);
      std::size_t pos = 0;
      for (auto r : rows) pos += d.labels[r];
      EXPECT_TRUE(pos == 6 || pos == 7) << pos;
      EXPECT_TRUE(rows.size() == 44 || rows.size() == 45) << rows.size();
      total += rows.size();
    }
    EXPECT_EQ(total, 221u);
  }
}

TEST(Folds, DeterministicAndPartitioning) {
  const Dataset d = synthetic(37, 12, 1, 4);
  const FoldPlan a = make_folds(d, 4, true, 9);
  const FoldPlan b = make_folds(d, 4, true, 9);
  EXPECT_EQ(a.assignments, b.assignments);
  for (std::size_t f = 0; f < 4; ++f) {
    std::set<std::size_t> all;
    for (auto r : a.test_rows(f)) all.insert(r);
    for (auto r : a.train_rows(f)) EXPECT_TRUE(all.insert(r).second);
    EXPECT_EQ(all.size(), 37u);
  }
  const FoldPlan u = make_folds(d, 4, false, 9);
  for (std::size_t f = 0; f < 4; ++f) EXPECT_FALSE(u.test_rows(f).empty());
}

TEST(Folds, Errors) {
  const Dataset d = synthetic(20, 3, 1, 4);
  EXPECT_EQ(code_of([&] { make_folds(d, 5, true, 0); }), ErrorCode::TooFewClassMembers);
  EXPECT_EQ(code_of([&] { make_folds(d, 1, true, 0); }), ErrorCode::InvalidArgument);
  FoldPlan plan = make_folds(d, 2, true, 0);
  EXPECT_EQ(code_of([&] { validate_fold_plan(plan, 21); }), ErrorCode::FoldMismatch);
}

TEST(DatasetCsv, RoundTripsThroughLoader) {
  const Dataset d = synthetic(12, 5, 3, 6);
  std::istringstream in(dataset_to_csv(d, "label"));
  const Dataset back = dataset_from_table(parse_csv(in), label("label"));
  EXPECT_EQ(back.features, d.features);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.feature_names, d.feature_names);
}
