#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace covhess {

struct IdentityCheck {
  std::string name;
  std::size_t cases = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  /// For checks reported as a lower bound (sampled alignment), the minimum value.
  bool lower_bound = false;

  bool passed() const { return lower_bound ? max_residual >= tolerance : max_residual < tolerance; }
};

/// Randomized runs of the separability identities and the Gaussian Fisher
/// fixture, deterministic in `seed`.
std::vector<IdentityCheck> run_identity_checks(std::uint64_t seed);

}  // namespace covhess
