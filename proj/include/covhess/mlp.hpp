#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "covhess/dataset.hpp"
#include "covhess/linalg.hpp"

namespace covhess {

/// Fully connected binary classifier: ReLU after every hidden layer, a
/// single sigmoid output unit.
struct MlpModel {
  std::vector<std::size_t> layer_dims;  // [D, h1, ..., 1]
  std::vector<Matrix> weights;          // weights[l] is layer_dims[l+1] x layer_dims[l]
  std::vector<Vector> biases;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;
  bool all_finite() const;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

inline constexpr double kProbabilityClamp = 1e-12;

/// Glorot-uniform weights from `seed`, zero biases.
MlpModel init_mlp(std::size_t input_dim, std::span<const std::size_t> hidden, std::uint64_t seed);
/// All-zero parameters (output 0.5 everywhere).
MlpModel zero_mlp(std::span<const std::size_t> layer_dims);

/// Throws DimensionMismatch unless weights/biases conform to layer_dims.
void validate(const MlpModel& model);

double logit(const MlpModel& model, std::span<const double> x);
/// Sigmoid output clamped to [1e-12, 1 - 1e-12].
double forward(const MlpModel& model, std::span<const double> x);
std::vector<double> predict_proba(const MlpModel& model, const Matrix& x);

/// Negative log-likelihood of one sample under the clamped output.
double sample_nll(const MlpModel& model, std::span<const double> x, int label);
/// Summed (not averaged) binary cross-entropy over the dataset.
double bce_loss(const MlpModel& model, const Dataset& data);

/// Same shape as the model's parameters.
struct MlpGradient {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static MlpGradient zeros_like(const MlpModel& model);
  std::vector<double> flatten() const;
};

/// Exact backprop gradient of bce_loss over every row of `batch`.
MlpGradient grad_params(const MlpModel& model, const Dataset& batch);
/// Same, over the listed rows; returns the batch loss.
double accumulate_grad(const MlpModel& model, const Matrix& x, std::span<const int> labels,
                       std::span<const std::size_t> rows, MlpGradient& grad);

/// Gradient of the per-sample negative log-likelihood with respect to x.
Vector grad_input(const MlpModel& model, std::span<const double> x, int label);

/// Flat parameter view in layer order: weights row-major, then biases.
std::vector<double> flatten_parameters(const MlpModel& model);
void assign_parameters(MlpModel& model, std::span<const double> flat);

enum class OptimizerKind { Sgd, Adam };

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

void validate(const TrainConfig& config);

struct TrainReport {
  double initial_loss = 0.0;
  std::vector<double> epoch_losses;  // full-data bce_loss after each epoch
  double final_loss = 0.0;
};

struct TrainResult {
  MlpModel model;
  TrainReport report;
};

/// Minibatch training on the summed loss. Deterministic for a fixed config.
/// Throws DivergedLoss if the loss becomes non-finite.
TrainResult train(MlpModel model, const Dataset& data, const TrainConfig& config);

}  // namespace covhess
