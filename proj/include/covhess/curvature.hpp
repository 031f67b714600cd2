#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "covhess/dataset.hpp"
#include "covhess/linalg.hpp"
#include "covhess/mlp.hpp"

namespace covhess {

// Curvature here is taken with respect to the input feature vector, averaged
// over samples, so its eigenvectors live in the same D-dimensional space as
// the covariance eigenvectors and can be paired with them.

enum class CurvatureMethod { Fisher, ExactHessian };

std::string_view to_string(CurvatureMethod method);
CurvatureMethod parse_curvature_method(std::string_view name);

struct CurvatureMatrix {
  Matrix matrix;  // D x D, symmetric
  CurvatureMethod method = CurvatureMethod::Fisher;
  std::size_t n_samples = 0;
  /// ||H - H^T||_F / ||H||_F before symmetrization (exact Hessian only).
  double asymmetry = 0.0;
};

/// Gradient of a per-sample negative log-likelihood with respect to the input.
using InputGradientFn = std::function<Vector(std::span<const double> x, int label)>;

InputGradientFn model_input_gradient(const MlpModel& model);

/// sum_k w_k g_k g_k^T, reduced in index order.
Matrix weighted_outer_sum(std::span<const Vector> gradients, std::span<const double> weights);

/// (1/n) sum_i g_i g_i^T with g_i the input gradient of sample i's NLL.
CurvatureMatrix fisher_matrix(const InputGradientFn& gradient, const Matrix& x, std::span<const int> labels);
CurvatureMatrix fisher_matrix(const MlpModel& model, const Dataset& data);

/// Sample-averaged input Hessian by central differences of the input
/// gradient with per-sample step `step_scale * (1 + ||x||_inf)`, then
/// symmetrized as (H + H^T) / 2.
CurvatureMatrix exact_input_hessian(const InputGradientFn& gradient, const Matrix& x, std::span<const int> labels,
                                    double step_scale = 1e-4);
CurvatureMatrix exact_input_hessian(const MlpModel& model, const Dataset& data, double step_scale = 1e-4);

CurvatureMatrix compute_curvature(const MlpModel& model, const Dataset& data, CurvatureMethod method);

struct SpectrumDiagnostics {
  Vector eigenvalues;
  /// log10(lambda_k / lambda_{k+1}) while both are positive.
  Vector log10_gaps;
  double dominance_ratio = 0.0;  // lambda_1 / lambda_2; +inf when lambda_2 <= 0
  bool first_eigenvalue_dominant = false;
};

inline constexpr double kDominanceThreshold = 10.0;

/// Throws NonPositiveLeadingEigenvalue if lambda_1 <= 0.
SpectrumDiagnostics eigenspectrum_report(const EigenDecomposition& decomp);

/// Probabilists' Gauss-Hermite rule (weights sum to 1) from the eigenpairs
/// of the Hermite Jacobi matrix.
struct QuadratureRule {
  Vector nodes;
  Vector weights;
};
QuadratureRule gauss_hermite(std::size_t points);

struct GaussianCurvature {
  double fisher = 0.0;       // E[(d/dtheta log N(theta; mu, sigma))^2]
  double hessian = 0.0;      // -d2/dtheta2 log N, by central differences
  double analytic = 0.0;     // 1 / sigma^2
};

/// Fisher information and Hessian of the Gaussian negative log-likelihood in
/// its location parameter, with the expectation taken by quadrature.
GaussianCurvature gaussian_curvature(double mu, double sigma, std::size_t points = 8);

}  // namespace covhess
