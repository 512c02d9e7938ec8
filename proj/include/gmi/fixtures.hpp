#pragma once
// Infinite joints over the LogSquared family, held as certified truncations.
//
//   diagonal   p(k, k) = p_k
//   odd/even   p(1, k) = p_k for odd k, p(2, k) = p_k for even k
//   perturbed  uniform 2x2 at 1/4 - e/4 per cell plus p(k, k) = e p_k,
//              k >= 3, with e = 1/m; tends to the uniform 2x2 as m grows
//
// Truncations keep enough cells that the order-n transform leaves at most
// eps of its mass outside them.

#include <cstdint>
#include <span>
#include <vector>

#include "gmi/dist_core.hpp"

namespace gmi {

JointMass diagonal_log_squared(double eps, int n);
JointMass odd_even_log_squared(double eps, int n);
JointMass perturbed_uniform(std::int64_t m, double eps, int n);

// Exact odd/even joint over the first atoms up to `last`, renormalized.
JointMass odd_even_prefix(std::int64_t last);

struct Bounded {
  double value = 0.0;
  double error_bound = 0.0;
};

// Euclidean distance between the perturbed joint and the uniform 2x2.
Bounded perturbed_uniform_distance(std::int64_t m);

// Partial sums over k <= K of the Shannon MI series of the perturbed joint;
// they grow without bound because the diagonal part has infinite entropy.
std::vector<double> perturbed_uniform_kl_partial_sums(std::int64_t m,
                                                      std::span<const std::int64_t> ks);

}  // namespace gmi
