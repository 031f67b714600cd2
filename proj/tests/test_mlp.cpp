#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "covhess/error.hpp"
#include "covhess/mlp.hpp"
#include "covhess/random.hpp"

using namespace covhess;

namespace {

MlpModel chain_model() {
  const std::size_t dims[] = {1, 1, 1, 1, 1};
  MlpModel m = zero_mlp(dims);
  m.weights[0](0, 0) = 2.0;
  m.biases[0][0] = 0.1;
  m.weights[1](0, 0) = 1.5;
  m.biases[1][0] = 0.2;
  m.weights[2](0, 0) = 0.5;
  m.biases[2][0] = -0.3;
  m.weights[3](0, 0) = -0.8;
  m.biases[3][0] = 0.4;
  return m;
}

MlpModel random_model(Rng& rng, std::vector<std::size_t> hidden, std::size_t d) {
  MlpModel m = init_mlp(d, hidden, rng.next());
  for (auto& b : m.biases)
    for (double& v : b) v = rng.uniform(-0.5, 0.5);
  return m;
}

Dataset toy_data(Rng& rng, std::size_t n, std::size_t d) {
  Matrix x(n, d);
  for (double& v : x.data()) v = rng.normal();
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 2);
  return make_dataset(std::move(x), std::move(y));
}

// max |a - b| / max(max|a|, max|b|)
double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, scale = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return scale == 0 ? diff : diff / scale;
}

}  // namespace

TEST(Forward, ZeroModelIsOneHalf) {
  const std::size_t dims[] = {3, 4, 2, 1};
  const MlpModel m = zero_mlp(dims);
  EXPECT_EQ(forward(m, Vector{1, -2, 3}), 0.5);
  EXPECT_EQ(forward(m, Vector{0, 0, 0}), 0.5);
}

TEST(Forward, HandBuiltChain) {
  const MlpModel m = chain_model();
  EXPECT_NEAR(forward(m, Vector{1.5}), 0.21416501695744133, 1e-15);
}

TEST(Forward, OutputRangeAndClamp) {
  Rng rng(1);
  const MlpModel m = random_model(rng, {8, 4}, 3);
  for (int t = 0; t < 100; ++t) {
    const Vector x{rng.normal(0, 100), rng.normal(0, 100), rng.normal(0, 100)};
    const double p = forward(m, x);
    EXPECT_GE(p, kProbabilityClamp);
    EXPECT_LE(p, 1.0 - kProbabilityClamp);
  }
  EXPECT_THROW(forward(m, Vector{1, 2}), Error);
}

TEST(Loss, UntrainedModelIsNLn2) {
  const std::size_t dims[] = {2, 3, 1};
  Rng rng(2);
  const Dataset d = toy_data(rng, 17, 2);
  EXPECT_NEAR(bce_loss(zero_mlp(dims), d), 17 * std::numbers::ln2, 1e-9);
}

TEST(Loss, HandComputedFixture) {
  const Dataset d = make_dataset(Matrix{{0.5}, {1.5}, {-1}}, {1, 0, 1});
  EXPECT_NEAR(bce_loss(chain_model(), d), 1.4984203663065156, 1e-12);
}

TEST(Loss, PerfectFitLimit) {
  const std::size_t dims[] = {1, 1};
  MlpModel m = zero_mlp(dims);
  m.weights[0](0, 0) = 50.0;
  const Dataset d = make_dataset(Matrix{{-1}, {1}}, {0, 1});
  // Both samples sit at the probability clamp.
  EXPECT_NEAR(bce_loss(m, d), -2 * std::log1p(-kProbabilityClamp), 1e-15);
}

TEST(Gradients, ParametersMatchFiniteDifferences) {
  Rng rng(3);
  const double h = 1e-5;
  for (int t = 0; t < 20; ++t) {
    const MlpModel m = random_model(rng, {3, 3, 3}, 4);
    const Dataset d = toy_data(rng, 6, 4);
    const std::vector<double> analytic = grad_params(m, d).flatten();
    std::vector<double> theta = flatten_parameters(m);
    std::vector<double> numeric(theta.size());
    MlpModel probe = m;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double keep = theta[k];
      theta[k] = keep + h;
      assign_parameters(probe, theta);
      const double up = bce_loss(probe, d);
      theta[k] = keep - h;
      assign_parameters(probe, theta);
      const double down = bce_loss(probe, d);
      theta[k] = keep;
      numeric[k] = (up - down) / (2 * h);
    }
    EXPECT_LT(relative_error(analytic, numeric), 1e-5) << "config " << t;
  }
}

TEST(Gradients, InputMatchesFiniteDifferences) {
  Rng rng(4);
  const double h = 1e-5;
  for (int t = 0; t < 20; ++t) {
    const MlpModel m = random_model(rng, {6, 5, 4}, 5);
    Vector x(5);
    for (double& v : x) v = rng.normal();
    const int label = t % 2;
    const Vector analytic = grad_input(m, x, label);
    Vector numeric(5);
    for (std::size_t j = 0; j < 5; ++j) {
      Vector a = x, b = x;
      a[j] += h;
      b[j] -= h;
      numeric[j] = (sample_nll(m, a, label) - sample_nll(m, b, label)) / (2 * h);
    }
    EXPECT_LT(relative_error(analytic, numeric), 1e-5) << "config " << t;
  }
}

TEST(Gradients, OutputBiasStationaryOnBalancedSymmetricData) {
  const std::size_t dims[] = {2, 3, 1};
  const Dataset d = make_dataset(Matrix{{1, 2}, {1, 2}, {-3, 0.5}, {-3, 0.5}}, {0, 1, 0, 1});
  const MlpGradient g = grad_params(zero_mlp(dims), d);
  EXPECT_NEAR(g.biases.back()[0], 0.0, 1e-15);
}

TEST(Gradients, DuplicatingSamplesDoublesGradient) {
  Rng rng(5);
  const MlpModel m = random_model(rng, {4, 3}, 3);
  const Dataset d = toy_data(rng, 5, 3);
  std::vector<std::size_t> twice{0, 1, 2, 3, 4, 0, 1, 2, 3, 4};
  const auto single = grad_params(m, d).flatten();
  const auto doubled = grad_params(m, d.subset(twice)).flatten();
  for (std::size_t k = 0; k < single.size(); ++k) EXPECT_NEAR(doubled[k], 2 * single[k], 1e-12);
}

TEST(Gradients, DeadInputHasZeroComponent) {
  Rng rng(6);
  MlpModel m = random_model(rng, {5, 4}, 3);
  for (std::size_t r = 0; r < m.weights[0].rows(); ++r) m.weights[0](r, 1) = 0.0;
  const Vector g = grad_input(m, Vector{0.3, -1.2, 0.8}, 1);
  EXPECT_EQ(g[1], 0.0);
}

TEST(Gradients, SplitColumnPreservesGradientSum) {
  Rng rng(7);
  const MlpModel m = random_model(rng, {5, 4}, 2);
  std::vector<std::size_t> hidden{5, 4};
  MlpModel split = init_mlp(3, hidden, 0);
  split.weights[1] = m.weights[1];
  split.weights[2] = m.weights[2];
  split.biases = m.biases;
  for (std::size_t r = 0; r < 5; ++r) {
    split.weights[0](r, 0) = m.weights[0](r, 0);
    split.weights[0](r, 1) = 0.5 * m.weights[0](r, 1);
    split.weights[0](r, 2) = 0.5 * m.weights[0](r, 1);
  }
  const Vector x{0.4, -0.7};
  const Vector g = grad_input(m, x, 0);
  const Vector gs = grad_input(split, Vector{0.4, -0.7, -0.7}, 0);
  EXPECT_NEAR(forward(m, x), forward(split, Vector{0.4, -0.7, -0.7}), 1e-15);
  EXPECT_NEAR(gs[1] + gs[2], g[1], 1e-12);
}

TEST(Train, SeparableToyReachesPerfectAccuracy) {
  Rng rng(8);
  Matrix x(40, 2);
  std::vector<int> y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    y[i] = i < 20;
    x(i, 0) = rng.normal(y[i] ? 2.0 : -2.0, 0.5);
    x(i, 1) = rng.normal(y[i] ? 2.0 : -2.0, 0.5);
  }
  const Dataset d = make_dataset(x, y);
  std::vector<std::size_t> hidden{8, 8, 8};
  TrainConfig c;
  const TrainResult r = train(init_mlp(2, hidden, 1), d, c);
  const auto p = predict_proba(r.model, d.features);
  for (std::size_t i = 0; i < 40; ++i) EXPECT_EQ(p[i] >= 0.5, y[i] == 1);
  EXPECT_LT(r.report.final_loss, r.report.initial_loss);
  EXPECT_EQ(r.report.epoch_losses.size(), 200u);
}

TEST(Train, ZeroLearningRateAndZeroEpochsLeaveModelUnchanged) {
  Rng rng(9);
  const Dataset d = toy_data(rng, 20, 3);
  std::vector<std::size_t> hidden{4, 4};
  const MlpModel init = init_mlp(3, hidden, 5);
  TrainConfig c;
  c.epochs = 3;
  c.learning_rate = 0.0;
  EXPECT_EQ(train(init, d, c).model, init);
  c.epochs = 0;
  c.learning_rate = 1e-3;
  const TrainResult r = train(init, d, c);
  EXPECT_EQ(r.model, init);
  EXPECT_TRUE(r.report.epoch_losses.empty());
}

TEST(Train, DeterministicForFixedSeed) {
  Rng rng(10);
  const Dataset d = toy_data(rng, 30, 3);
  std::vector<std::size_t> hidden{6, 4};
  TrainConfig c;
  c.epochs = 10;
  c.seed = 3;
  const TrainResult a = train(init_mlp(3, hidden, 2), d, c);
  const TrainResult b = train(init_mlp(3, hidden, 2), d, c);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.report.epoch_losses, b.report.epoch_losses);
  c.optimizer = OptimizerKind::Sgd;
  c.learning_rate = 1e-2;
  EXPECT_EQ(train(init_mlp(3, hidden, 2), d, c).model, train(init_mlp(3, hidden, 2), d, c).model);
}

TEST(Train, Errors) {
  std::vector<std::size_t> hidden{2};
  const Dataset one_class = make_dataset(Matrix{{1}, {2}}, {1, 1});
  try {
    train(init_mlp(1, hidden, 0), one_class, TrainConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingleClass);
  }
  TrainConfig bad;
  bad.batch_size = 0;
  EXPECT_THROW(validate(bad), Error);
  MlpModel poisoned = init_mlp(2, hidden, 0);
  poisoned.weights[1](0, 0) = std::numeric_limits<double>::quiet_NaN();
  const Dataset d = make_dataset(Matrix{{1, 2}, {-1, 3}, {2, -2}, {0, 1}}, {0, 1, 0, 1});
  try {
    train(poisoned, d, TrainConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DivergedLoss);
    EXPECT_TRUE(is_numerical(e.code()));
  }
}
