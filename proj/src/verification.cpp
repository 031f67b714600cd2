#include "covhess/verification.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "covhess/curvature.hpp"
#include "covhess/random.hpp"
#include "covhess/separability.hpp"

namespace covhess {

namespace {

Vector sample_class(Rng& rng, std::size_t n, double mean, double sd) {
  Vector v(n);
  for (double& x : v) x = rng.normal(mean, sd);
  return v;
}

IdentityCheck theorem1_batch(Rng& rng) {
  IdentityCheck c{"theorem1", 1000, 0.0, 1e-10, false};
  for (std::size_t k = 0; k < c.cases; ++k) {
    const std::size_t n = 2 + rng.below(99);
    const Vector a = sample_class(rng, n, rng.uniform(-3, 3), rng.uniform(0.2, 2));
    const Vector b = sample_class(rng, n, rng.uniform(-3, 3), rng.uniform(0.2, 2));
    c.max_residual = std::max(c.max_residual, theorem1_check(a, b).residual);
  }
  return c;
}

IdentityCheck theorem3_batch(Rng& rng) {
  IdentityCheck c{"theorem3", 100, 0.0, 1e-10, false};
  for (std::size_t k = 0; k < c.cases; ++k) {
    const Vector a = sample_class(rng, 2 + rng.below(99), rng.uniform(-3, 3), rng.uniform(0.2, 2));
    const Vector b = sample_class(rng, 2 + rng.below(99), rng.uniform(-3, 3), rng.uniform(0.2, 2));
    c.max_residual = std::max(c.max_residual, theorem3_check(a, b).max_residual);
  }
  return c;
}

IdentityCheck vrpt_batch(Rng& rng) {
  IdentityCheck c{"vrpt", 100, 0.0, 1e-10, false};
  for (std::size_t k = 0; k < c.cases; ++k) {
    const Vector a = sample_class(rng, 2 + rng.below(99), rng.uniform(-3, 3), rng.uniform(0.5, 2));
    const Vector b = sample_class(rng, 2 + rng.below(99), rng.uniform(-3, 3), rng.uniform(0.5, 2));
    double angle;
    do {
      angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    } while (std::abs(std::cos(angle)) < 1e-3);
    const Vector v{std::cos(angle), std::sin(angle)};
    const VrptResult r = vrpt_check(a, b, v);
    c.max_residual = std::max(c.max_residual, std::abs(r.projected_ratio - r.original_ratio));
  }
  return c;
}

IdentityCheck meanvec_batch(Rng& rng) {
  IdentityCheck c{"meanvec_eigen", 0, 0.0, 1e-10, false};
  for (std::size_t d : {2, 5, 10, 30}) {
    for (int rep = 0; rep < 25; ++rep, ++c.cases) {
      const Vector mu1 = sample_class(rng, d, 0.0, 2.0);
      const Vector mu2 = sample_class(rng, d, 0.0, 2.0);
      const double s1 = rng.uniform(0.1, 3.0), s2 = rng.uniform(0.1, 3.0);
      c.max_residual = std::max(c.max_residual, meanvec_eigen_check(mu1, mu2, s1, s2).residual);
    }
  }
  return c;
}

IdentityCheck meanvec_sampled(Rng& rng) {
  IdentityCheck c{"meanvec_sampled_alignment", 0, 1.0, 0.99, true};
  const std::size_t n = 10000;
  for (std::size_t d : {2, 5, 10, 30}) {
    const Vector mu = sample_class(rng, d, 0.0, 1.0);
    const double sd = rng.uniform(0.5, 1.5);
    Matrix a(n, d), b(n, d);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < d; ++j) {
        a(r, j) = rng.normal(mu[j], sd);
        b(r, j) = rng.normal(-mu[j], sd);
      }
    c.max_residual = std::min(c.max_residual, sampled_meanvec_alignment(a, b));
    ++c.cases;
  }
  return c;
}

IdentityCheck gaussian_fisher() {
  IdentityCheck c{"gaussian_fisher", 0, 0.0, 1e-9, false};
  for (double sigma : {0.5, 1.0, 2.0}) {
    const GaussianCurvature g = gaussian_curvature(0.0, sigma);
    c.max_residual = std::max(c.max_residual, std::abs(g.fisher - g.analytic));
    ++c.cases;
  }
  return c;
}

}  // namespace

std::vector<IdentityCheck> run_identity_checks(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<IdentityCheck> out;
  out.push_back(theorem1_batch(rng));
  out.push_back(theorem3_batch(rng));
  out.push_back(vrpt_batch(rng));
  out.push_back(meanvec_batch(rng));
  out.push_back(meanvec_sampled(rng));
  out.push_back(gaussian_fisher());
  return out;
}

}  // namespace covhess
