#include "covhess/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "covhess/error.hpp"

namespace covhess {

std::string_view to_string(CurvatureMethod method) {
  return method == CurvatureMethod::Fisher ? "fisher" : "exact_hessian";
}

CurvatureMethod parse_curvature_method(std::string_view name) {
  if (name == "fisher") return CurvatureMethod::Fisher;
  if (name == "exact_hessian" || name == "exact") return CurvatureMethod::ExactHessian;
  throw Error(ErrorCode::InvalidArgument, "unknown curvature method '" + std::string(name) + "'");
}

InputGradientFn model_input_gradient(const MlpModel& model) {
  return [&model](std::span<const double> x, int label) { return grad_input(model, x, label); };
}

Matrix weighted_outer_sum(std::span<const Vector> gradients, std::span<const double> weights) {
  if (gradients.size() != weights.size()) throw Error(ErrorCode::LengthMismatch, "gradients vs weights");
  if (gradients.empty()) throw Error(ErrorCode::EmptyDataset, "no gradients");
  const std::size_t d = gradients.front().size();
  Matrix out(d, d);
  for (std::size_t k = 0; k < gradients.size(); ++k) {
    const Vector& g = gradients[k];
    if (g.size() != d) throw Error(ErrorCode::DimensionMismatch, "gradient length");
    for (std::size_t i = 0; i < d; ++i) {
      const double wgi = weights[k] * g[i];
      if (wgi == 0.0) continue;
      for (std::size_t j = i; j < d; ++j) out(i, j) += wgi * g[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) out(j, i) = out(i, j);
  return out;
}

CurvatureMatrix fisher_matrix(const InputGradientFn& gradient, const Matrix& x, std::span<const int> labels) {
  const std::size_t n = x.rows();
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "fisher_matrix on empty data");
  if (labels.size() != n) throw Error(ErrorCode::LengthMismatch, "labels vs rows");
  std::vector<Vector> grads;
  grads.reserve(n);
  for (std::size_t r = 0; r < n; ++r) grads.push_back(gradient(x.row(r), labels[r]));
  const std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  CurvatureMatrix c;
  c.matrix = weighted_outer_sum(grads, weights);
  c.method = CurvatureMethod::Fisher;
  c.n_samples = n;
  if (!c.matrix.all_finite()) throw Error(ErrorCode::NonFiniteCurvature, "Fisher matrix has non-finite entries");
  return c;
}

CurvatureMatrix fisher_matrix(const MlpModel& model, const Dataset& data) {
  return fisher_matrix(model_input_gradient(model), data.features, data.labels);
}

CurvatureMatrix exact_input_hessian(const InputGradientFn& gradient, const Matrix& x, std::span<const int> labels,
                                    double step_scale) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "exact_input_hessian on empty data");
  if (labels.size() != n) throw Error(ErrorCode::LengthMismatch, "labels vs rows");
  if (!(step_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "step_scale must be positive");

  Matrix h(d, d);
  Vector probe(d);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = x.row(r);
    double inf = 0.0;
    for (double v : row) inf = std::max(inf, std::abs(v));
    const double step = step_scale * (1.0 + inf);
    std::copy(row.begin(), row.end(), probe.begin());
    for (std::size_t j = 0; j < d; ++j) {
      probe[j] = row[j] + step;
      const Vector plus = gradient(probe, labels[r]);
      probe[j] = row[j] - step;
      const Vector minus = gradient(probe, labels[r]);
      probe[j] = row[j];
      for (std::size_t i = 0; i < d; ++i) h(i, j) += (plus[i] - minus[i]) / (2.0 * step);
    }
  }
  h = scale(h, 1.0 / static_cast<double>(n));
  if (!h.all_finite()) throw Error(ErrorCode::NonFiniteCurvature, "finite-difference Hessian is not finite");

  CurvatureMatrix c;
  const double norm = frobenius_norm(h);
  c.asymmetry = norm > 0.0 ? frobenius_norm(subtract(h, transpose(h))) / norm : 0.0;
  c.matrix = scale(add(h, transpose(h)), 0.5);
  c.method = CurvatureMethod::ExactHessian;
  c.n_samples = n;
  return c;
}

CurvatureMatrix exact_input_hessian(const MlpModel& model, const Dataset& data, double step_scale) {
  return exact_input_hessian(model_input_gradient(model), data.features, data.labels, step_scale);
}

CurvatureMatrix compute_curvature(const MlpModel& model, const Dataset& data, CurvatureMethod method) {
  return method == CurvatureMethod::Fisher ? fisher_matrix(model, data) : exact_input_hessian(model, data);
}

SpectrumDiagnostics eigenspectrum_report(const EigenDecomposition& decomp) {
  const Vector& ev = decomp.eigenvalues;
  if (ev.empty() || !(ev[0] > 0.0)) {
    throw Error(ErrorCode::NonPositiveLeadingEigenvalue,
                ev.empty() ? "empty spectrum" : "leading eigenvalue " + std::to_string(ev[0]));
  }
  SpectrumDiagnostics s;
  s.eigenvalues = ev;
  for (std::size_t k = 0; k + 1 < ev.size() && ev[k + 1] > 0.0; ++k) {
    s.log10_gaps.push_back(std::log10(ev[k]) - std::log10(ev[k + 1]));
  }
  s.dominance_ratio = ev.size() > 1 && ev[1] > 0.0 ? ev[0] / ev[1] : std::numeric_limits<double>::infinity();
  s.first_eigenvalue_dominant = s.dominance_ratio >= kDominanceThreshold;
  return s;
}

QuadratureRule gauss_hermite(std::size_t points) {
  if (points == 0) throw Error(ErrorCode::InvalidArgument, "quadrature needs at least one point");
  Matrix jacobi(points, points);
  for (std::size_t k = 1; k < points; ++k) {
    jacobi(k - 1, k) = jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
  }
  const EigenDecomposition eig = sym_eigen(jacobi);
  QuadratureRule rule;
  for (std::size_t k = 0; k < points; ++k) {
    rule.nodes.push_back(eig.eigenvalues[k]);
    const double first = eig.eigenvectors(0, k);
    rule.weights.push_back(first * first);
  }
  return rule;
}

GaussianCurvature gaussian_curvature(double mu, double sigma, std::size_t points) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  const double var = sigma * sigma;
  // d/dtheta of -log N(theta; mu, sigma).
  auto score = [&](double theta) { return (theta - mu) / var; };

  const QuadratureRule rule = gauss_hermite(points);
  std::vector<Vector> grads;
  for (double node : rule.nodes) grads.push_back(Vector{score(mu + sigma * node)});

  GaussianCurvature out;
  out.fisher = weighted_outer_sum(grads, rule.weights)(0, 0);
  const double h = 1e-3 * sigma;
  out.hessian = (score(mu + h) - score(mu - h)) / (2.0 * h);
  out.analytic = 1.0 / var;
  return out;
}

}  // namespace covhess
