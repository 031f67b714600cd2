#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "covhess/curvature.hpp"
#include "covhess/error.hpp"
#include "covhess/random.hpp"

using namespace covhess;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Logistic surrogate: negative log-likelihood of a linear logit w.x + b.
struct Logistic {
  Vector w;
  double b;
  InputGradientFn gradient() const {
    return [this](std::span<const double> x, int y) {
      const double p = sigmoid(dot(w, x) + b);
      Vector g(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) g[i] = (p - y) * w[i];
      return g;
    };
  }
  Matrix hessian(const Matrix& x) const {
    Matrix h(w.size(), w.size());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double p = sigmoid(dot(w, x.row(r)) + b);
      h = add(h, scale(outer_product(w, w), p * (1 - p) / x.rows()));
    }
    return h;
  }
};

Matrix random_points(Rng& rng, std::size_t n, std::size_t d) {
  Matrix x(n, d);
  for (double& v : x.data()) v = rng.normal();
  return x;
}

}  // namespace

TEST(Fisher, ZeroFirstLayerGivesZeroMatrix) {
  std::vector<std::size_t> hidden{4, 3};
  MlpModel m = init_mlp(3, hidden, 1);
  for (double& v : m.weights[0].data()) v = 0.0;
  Rng rng(1);
  const Dataset d = make_dataset(random_points(rng, 10, 3), {0, 1, 0, 1, 0, 1, 0, 1, 0, 1});
  EXPECT_EQ(fisher_matrix(m, d).matrix, Matrix(3, 3));
  EXPECT_EQ(exact_input_hessian(m, d).matrix, Matrix(3, 3));
}

TEST(Fisher, SingleSampleIsRankOne) {
  std::vector<std::size_t> hidden{5};
  const MlpModel m = init_mlp(4, hidden, 2);
  const Vector x{0.2, -0.5, 1.1, 0.3};
  const Dataset d = make_dataset(Matrix(1, 4, x), {1});
  const Matrix f = fisher_matrix(m, d).matrix;
  const Vector g = grad_input(m, x, 1);
  EXPECT_NEAR(trace(f), dot(g, g), 1e-15);
  const auto eig = sym_eigen(f);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_NEAR(eig.eigenvalues[k], 0.0, 1e-12 * eig.eigenvalues[0]);
}

TEST(Fisher, SymmetricPsdAndRowPermutationInvariant) {
  Rng rng(3);
  std::vector<std::size_t> hidden{8, 4};
  const MlpModel m = init_mlp(5, hidden, 3);
  std::vector<int> y(30);
  for (std::size_t i = 0; i < 30; ++i) y[i] = i % 3 == 0;
  const Dataset d = make_dataset(random_points(rng, 30, 5), y);
  const CurvatureMatrix f = fisher_matrix(m, d);
  EXPECT_EQ(f.matrix, transpose(f.matrix));
  EXPECT_EQ(f.method, CurvatureMethod::Fisher);
  EXPECT_EQ(f.n_samples, 30u);
  const auto eig = sym_eigen(f.matrix);
  EXPECT_GE(eig.eigenvalues.back(), -1e-10 * eig.eigenvalues.front());

  std::vector<std::size_t> order(30);
  for (std::size_t i = 0; i < 30; ++i) order[i] = 29 - i;
  const Matrix g = fisher_matrix(m, d.subset(order)).matrix;
  EXPECT_LT(max_abs(subtract(g, f.matrix)), 1e-15 * max_abs(f.matrix) + 1e-300);
}

TEST(Fisher, EmptyDataset) {
  try {
    fisher_matrix(Logistic{{1.0}, 0.0}.gradient(), Matrix(0, 1), std::vector<int>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDataset);
  }
}

TEST(ExactHessian, LogisticSurrogateMatchesAnalytic) {
  Rng rng(4);
  const Logistic model{{0.8, -1.3, 0.4}, 0.2};
  const Matrix x = random_points(rng, 25, 3);
  std::vector<int> y(25);
  for (std::size_t i = 0; i < 25; ++i) y[i] = i % 2;
  const auto fn = model.gradient();
  const CurvatureMatrix h = exact_input_hessian(fn, x, y);
  EXPECT_LT(max_abs(subtract(h.matrix, model.hessian(x))), 1e-6);
  EXPECT_LT(h.asymmetry, 1e-4);
}

TEST(ExactHessian, FisherSharesLeadingDirectionOnSurrogate) {
  Rng rng(5);
  const Logistic model{{1.5, 0.5, -0.7, 0.2}, -0.1};
  const Matrix x = random_points(rng, 60, 4);
  std::vector<int> y(60);
  for (std::size_t i = 0; i < 60; ++i) y[i] = rng.uniform() < sigmoid(dot(model.w, x.row(i)) + model.b);
  const auto fn = model.gradient();
  const Vector vf = sym_eigen(fisher_matrix(fn, x, y).matrix).eigenvectors.column(0);
  const Vector vh = sym_eigen(exact_input_hessian(fn, x, y).matrix).eigenvectors.column(0);
  EXPECT_GE(std::abs(dot(vf, vh)), 0.99);
}

TEST(ExactHessian, NetworkAsymmetryIsSmall) {
  Rng rng(6);
  std::vector<std::size_t> hidden{8, 6, 4};
  const MlpModel m = init_mlp(4, hidden, 6);
  std::vector<int> y(20);
  for (std::size_t i = 0; i < 20; ++i) y[i] = i % 2;
  const Dataset d = make_dataset(random_points(rng, 20, 4), y);
  const CurvatureMatrix h = exact_input_hessian(m, d);
  EXPECT_EQ(h.matrix, transpose(h.matrix));
  EXPECT_LT(h.asymmetry, 1e-4);
  EXPECT_EQ(compute_curvature(m, d, CurvatureMethod::ExactHessian).matrix, h.matrix);
}

TEST(Spectrum, ConstructedSpectra) {
  EigenDecomposition e;
  e.eigenvalues = {100, 10, 1};
  e.eigenvectors = Matrix::identity(3);
  const auto r = eigenspectrum_report(e);
  EXPECT_NEAR(r.log10_gaps[0], 1.0, 1e-15);
  EXPECT_NEAR(r.log10_gaps[1], 1.0, 1e-15);
  EXPECT_TRUE(r.first_eigenvalue_dominant);
  EXPECT_EQ(r.dominance_ratio, 10.0);

  e.eigenvalues = {5, 4.9, 4.8};
  EXPECT_FALSE(eigenspectrum_report(e).first_eigenvalue_dominant);

  e.eigenvalues = {2, 0, 0};
  EXPECT_EQ(eigenspectrum_report(e).dominance_ratio, std::numeric_limits<double>::infinity());

  e.eigenvalues = {0, -1, -2};
  try {
    eigenspectrum_report(e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::NonPositiveLeadingEigenvalue);
  }
}

TEST(GaussHermite, ThreePointRule) {
  const QuadratureRule r = gauss_hermite(3);
  EXPECT_NEAR(r.nodes[0], std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(r.nodes[1], 0.0, 1e-14);
  EXPECT_NEAR(r.nodes[2], -std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(r.weights[0], 1.0 / 6.0, 1e-14);
  EXPECT_NEAR(r.weights[1], 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(r.weights[2], 1.0 / 6.0, 1e-14);
}

TEST(GaussianFixture, FisherEqualsInverseVariance) {
  for (double sigma : {0.5, 1.0, 2.0}) {
    const GaussianCurvature g = gaussian_curvature(0.3, sigma);
    EXPECT_NEAR(g.fisher, 1.0 / (sigma * sigma), 1e-9);
    EXPECT_NEAR(g.hessian, 1.0 / (sigma * sigma), 1e-9);
    EXPECT_EQ(g.analytic, 1.0 / (sigma * sigma));
  }
}

TEST(CurvatureMethodNames, RoundTrip) {
  EXPECT_EQ(parse_curvature_method("fisher"), CurvatureMethod::Fisher);
  EXPECT_EQ(parse_curvature_method(to_string(CurvatureMethod::ExactHessian)), CurvatureMethod::ExactHessian);
  EXPECT_THROW(parse_curvature_method("gauss"), Error);
}
