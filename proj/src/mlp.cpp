#include "covhess/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "covhess/error.hpp"
#include "covhess/random.hpp"

namespace covhess {

namespace {

// Per-sample activations: acts[l] is the input to layer l, pre[l] its
// pre-activation output.
struct Trace {
  std::vector<Vector> acts;
  std::vector<Vector> pre;

  explicit Trace(const MlpModel& m) {
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
      acts.emplace_back(m.layer_dims[l]);
      pre.emplace_back(m.layer_dims[l + 1]);
    }
  }
};

void require_input(const MlpModel& m, std::span<const double> x) {
  if (x.size() != m.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(m.input_dim()) +
                                                  " inputs, got " + std::to_string(x.size()));
  }
}

double run_forward(const MlpModel& m, std::span<const double> x, Trace& t) {
  std::copy(x.begin(), x.end(), t.acts[0].begin());
  const std::size_t layers = m.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& w = m.weights[l];
    const Vector& in = t.acts[l];
    Vector& out = t.pre[l];
    for (std::size_t i = 0; i < w.rows(); ++i) {
      auto wi = w.row(i);
      double s = m.biases[l][i];
      for (std::size_t j = 0; j < in.size(); ++j) s += wi[j] * in[j];
      out[i] = s;
    }
    if (l + 1 < layers) {
      Vector& next = t.acts[l + 1];
      for (std::size_t i = 0; i < out.size(); ++i) next[i] = out[i] > 0.0 ? out[i] : 0.0;
    }
  }
  return t.pre.back()[0];
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Loss and d(loss)/d(logit) under the clamped output; the derivative is zero
// where the clamp is active because the clamped loss is constant there.
std::pair<double, double> nll_and_slope(double z, int label) {
  const double p = sigmoid(z);
  const double pc = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  const double loss = label == 1 ? -std::log(pc) : -std::log(1.0 - pc);
  const bool clamped = p < kProbabilityClamp || p > 1.0 - kProbabilityClamp;
  const double slope = clamped ? 0.0 : p - static_cast<double>(label);
  return {loss, slope};
}

// Back-propagates d(loss)/d(logit) through a filled trace. Accumulates
// parameter gradients when `grad` is given; returns d(loss)/d(input) when
// `want_input` is set.
Vector run_backward(const MlpModel& m, const Trace& t, double slope, MlpGradient* grad, bool want_input) {
  const std::size_t layers = m.layer_count();
  Vector delta{slope};
  Vector below;
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& w = m.weights[l];
    const Vector& in = t.acts[l];
    if (grad) {
      Matrix& gw = grad->weights[l];
      Vector& gb = grad->biases[l];
      for (std::size_t i = 0; i < w.rows(); ++i) {
        const double di = delta[i];
        if (di == 0.0) continue;
        gb[i] += di;
        auto gwi = gw.row(i);
        for (std::size_t j = 0; j < in.size(); ++j) gwi[j] += di * in[j];
      }
    }
    if (l == 0 && !want_input) break;
    below.assign(w.cols(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      const double di = delta[i];
      if (di == 0.0) continue;
      auto wi = w.row(i);
      for (std::size_t j = 0; j < below.size(); ++j) below[j] += wi[j] * di;
    }
    if (l > 0) {
      const Vector& pre = t.pre[l - 1];
      for (std::size_t j = 0; j < below.size(); ++j)
        if (!(pre[j] > 0.0)) below[j] = 0.0;
    }
    delta.swap(below);
  }
  return want_input ? delta : Vector{};
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].data().size() + biases[l].size();
  return n;
}

bool MlpModel::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].all_finite()) return false;
    for (double b : biases[l])
      if (!std::isfinite(b)) return false;
  }
  return true;
}

void validate(const MlpModel& m) {
  if (m.layer_dims.size() < 2 || m.layer_dims.back() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "layer_dims must have at least 2 entries ending in 1");
  }
  if (m.weights.size() + 1 != m.layer_dims.size() || m.biases.size() != m.weights.size()) {
    throw Error(ErrorCode::DimensionMismatch, "layer count does not match layer_dims");
  }
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    if (m.weights[l].rows() != m.layer_dims[l + 1] || m.weights[l].cols() != m.layer_dims[l] ||
        m.biases[l].size() != m.layer_dims[l + 1]) {
      throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(l) + " does not conform");
    }
  }
}

MlpModel zero_mlp(std::span<const std::size_t> layer_dims) {
  MlpModel m;
  m.layer_dims.assign(layer_dims.begin(), layer_dims.end());
  for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
    m.weights.emplace_back(m.layer_dims[l + 1], m.layer_dims[l]);
    m.biases.emplace_back(m.layer_dims[l + 1], 0.0);
  }
  validate(m);
  return m;
}

MlpModel init_mlp(std::size_t input_dim, std::span<const std::size_t> hidden, std::uint64_t seed) {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  MlpModel m = zero_mlp(dims);
  m.seed = seed;
  Rng rng(seed);
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
    for (double& w : m.weights[l].data()) w = rng.uniform(-limit, limit);
  }
  return m;
}

double logit(const MlpModel& model, std::span<const double> x) {
  require_input(model, x);
  Trace t(model);
  return run_forward(model, x, t);
}

double forward(const MlpModel& model, std::span<const double> x) {
  return std::clamp(sigmoid(logit(model, x)), kProbabilityClamp, 1.0 - kProbabilityClamp);
}

std::vector<double> predict_proba(const MlpModel& model, const Matrix& x) {
  if (x.cols() != model.input_dim()) throw Error(ErrorCode::DimensionMismatch, "predict_proba input width");
  Trace t(model);
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    out[r] = std::clamp(sigmoid(run_forward(model, x.row(r), t)), kProbabilityClamp, 1.0 - kProbabilityClamp);
  }
  return out;
}

double sample_nll(const MlpModel& model, std::span<const double> x, int label) {
  return nll_and_slope(logit(model, x), label).first;
}

double bce_loss(const MlpModel& model, const Dataset& data) {
  if (data.features.cols() != model.input_dim()) throw Error(ErrorCode::DimensionMismatch, "bce_loss input width");
  Trace t(model);
  double total = 0.0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    total += nll_and_slope(run_forward(model, data.features.row(r), t), data.labels[r]).first;
  }
  return total;
}

MlpGradient MlpGradient::zeros_like(const MlpModel& model) {
  MlpGradient g;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    g.weights.emplace_back(model.weights[l].rows(), model.weights[l].cols());
    g.biases.emplace_back(model.biases[l].size(), 0.0);
  }
  return g;
}

std::vector<double> MlpGradient::flatten() const {
  std::vector<double> flat;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.insert(flat.end(), weights[l].data().begin(), weights[l].data().end());
    flat.insert(flat.end(), biases[l].begin(), biases[l].end());
  }
  return flat;
}

double accumulate_grad(const MlpModel& model, const Matrix& x, std::span<const int> labels,
                       std::span<const std::size_t> rows, MlpGradient& grad) {
  if (x.cols() != model.input_dim()) throw Error(ErrorCode::DimensionMismatch, "gradient input width");
  Trace t(model);
  double loss = 0.0;
  for (std::size_t r : rows) {
    const auto [l, slope] = nll_and_slope(run_forward(model, x.row(r), t), labels[r]);
    loss += l;
    if (slope != 0.0) run_backward(model, t, slope, &grad, false);
  }
  return loss;
}

MlpGradient grad_params(const MlpModel& model, const Dataset& batch) {
  MlpGradient g = MlpGradient::zeros_like(model);
  std::vector<std::size_t> rows(batch.size());
  std::iota(rows.begin(), rows.end(), 0);
  accumulate_grad(model, batch.features, batch.labels, rows, g);
  return g;
}

Vector grad_input(const MlpModel& model, std::span<const double> x, int label) {
  require_input(model, x);
  Trace t(model);
  const double z = run_forward(model, x, t);
  const double slope = nll_and_slope(z, label).second;
  if (slope == 0.0) return Vector(x.size(), 0.0);
  return run_backward(model, t, slope, nullptr, true);
}

std::vector<double> flatten_parameters(const MlpModel& model) {
  std::vector<double> flat;
  flat.reserve(model.parameter_count());
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    flat.insert(flat.end(), model.weights[l].data().begin(), model.weights[l].data().end());
    flat.insert(flat.end(), model.biases[l].begin(), model.biases[l].end());
  }
  return flat;
}

void assign_parameters(MlpModel& model, std::span<const double> flat) {
  if (flat.size() != model.parameter_count()) throw Error(ErrorCode::DimensionMismatch, "parameter vector length");
  std::size_t pos = 0;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    for (double& w : model.weights[l].data()) w = flat[pos++];
    for (double& b : model.biases[l]) b = flat[pos++];
  }
}

void validate(const TrainConfig& c) {
  if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate)) {
    throw Error(ErrorCode::InvalidArgument, "learning_rate must be finite and non-negative");
  }
  if (c.batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch_size must be at least 1");
  if (c.optimizer == OptimizerKind::Adam &&
      !(c.beta1 >= 0.0 && c.beta1 < 1.0 && c.beta2 >= 0.0 && c.beta2 < 1.0 && c.epsilon > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "Adam needs beta1, beta2 in [0,1) and epsilon > 0");
  }
}

TrainResult train(MlpModel model, const Dataset& data, const TrainConfig& config) {
  validate(model);
  validate(config);
  if (data.size() == 0) throw Error(ErrorCode::EmptyDataset, "training set is empty");
  if (!data.has_both_classes()) throw Error(ErrorCode::SingleClass, "training set needs both classes");
  if (data.dims() != model.input_dim()) throw Error(ErrorCode::DimensionMismatch, "training data width");

  TrainResult result;
  result.report.initial_loss = bce_loss(model, data);
  if (!std::isfinite(result.report.initial_loss)) throw Error(ErrorCode::DivergedLoss, "initial loss is not finite");

  std::vector<double> params = flatten_parameters(model);
  std::vector<double> m1(params.size(), 0.0);
  std::vector<double> m2(params.size(), 0.0);
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;

  Rng rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      MlpGradient g = MlpGradient::zeros_like(model);
      accumulate_grad(model, data.features, data.labels,
                      std::span<const std::size_t>(order).subspan(start, end - start), g);
      const std::vector<double> flat = g.flatten();
      if (config.optimizer == OptimizerKind::Sgd) {
        for (std::size_t i = 0; i < params.size(); ++i) params[i] -= config.learning_rate * flat[i];
      } else {
        beta1_pow *= config.beta1;
        beta2_pow *= config.beta2;
        for (std::size_t i = 0; i < params.size(); ++i) {
          m1[i] = config.beta1 * m1[i] + (1.0 - config.beta1) * flat[i];
          m2[i] = config.beta2 * m2[i] + (1.0 - config.beta2) * flat[i] * flat[i];
          const double m_hat = m1[i] / (1.0 - beta1_pow);
          const double v_hat = m2[i] / (1.0 - beta2_pow);
          params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
        }
      }
      assign_parameters(model, params);
    }
    const double loss = bce_loss(model, data);
    if (!std::isfinite(loss) || !model.all_finite()) {
      throw Error(ErrorCode::DivergedLoss, "loss became non-finite at epoch " + std::to_string(epoch + 1));
    }
    result.report.epoch_losses.push_back(loss);
  }
  result.report.final_loss =
      result.report.epoch_losses.empty() ? result.report.initial_loss : result.report.epoch_losses.back();
  result.model = std::move(model);
  return result;
}

}  // namespace covhess
