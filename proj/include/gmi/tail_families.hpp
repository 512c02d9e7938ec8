#pragma once
// Countable-support families with certified tail bounds.
//
// Each family is nonincreasing from its first index, which is what makes
// the integral-comparison bounds below sound:
//   Geometric(q)  p_k = (1-q) q^{k-1},        k >= 1, finite entropy
//   PowerLaw(a)   p_k = k^{-a} / zeta(a),     k >= 1, finite entropy
//   LogSquared    p_k = c / (k ln^2 k),       k >= 3, infinite entropy
// Sums over k > K of convex decreasing terms are bracketed by the
// trapezoid (below) and midpoint (above) integrals.

#include <cstdint>
#include <limits>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

#include "gmi/dist_core.hpp"

namespace gmi {

inline constexpr std::int64_t kDefaultIterationCap = 100'000'000;

enum class FamilyKind { Geometric, PowerLaw, LogSquared };
enum class EntropyClass { Finite, Infinite };

struct TailBracket {
  double lower = 0.0;
  double upper = 0.0;
};

class TailFamily {
 public:
  static TailFamily geometric(double q);
  static TailFamily power_law(double alpha);
  static TailFamily log_squared();
  // parameter is q for Geometric, alpha for PowerLaw, ignored for LogSquared.
  static TailFamily make(FamilyKind kind, double parameter = 0.0);

  FamilyKind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return parameter_; }
  std::string name() const;
  EntropyClass entropy_class() const noexcept;

  std::int64_t first_index() const noexcept { return kind_ == FamilyKind::LogSquared ? 3 : 1; }
  // Normalizing constant: 1/(1-q) scale is exact for Geometric; zeta(alpha)
  // for PowerLaw; c for LogSquared. Relative uncertainty alongside.
  double normalizer() const noexcept { return normalizer_; }
  double normalizer_rel_error() const noexcept { return normalizer_rel_error_; }

  double term(std::int64_t k) const;
  double log_term(std::int64_t k) const;
  // out[i] = log_term(first + i); uses the active SIMD kernels.
  void log_terms(std::int64_t first, std::span<double> out) const;

  // Bounds on sum_{k>K} p_k.
  TailBracket tail_mass(std::int64_t last) const;
  double tail_bound(std::int64_t last) const { return tail_mass(last).upper; }
  // Upper bound on sum_{k>K} p_k^s (real s >= 1); +inf when divergent.
  double power_tail_bound(std::int64_t last, double s) const;
  // Upper bound on sum_{k>K} p_k^s ln(1/p_k); +inf when divergent.
  double entropy_tail_bound(std::int64_t last, double s) const;

 private:
  TailFamily(FamilyKind kind, double parameter);

  double family_power_tail(std::int64_t last, double s) const;

  FamilyKind kind_;
  double parameter_;
  double normalizer_ = 1.0;
  double log_normalizer_ = 0.0;
  double normalizer_rel_error_ = 0.0;
};

// Describes the unrepresented part of a truncated distribution in the units
// of its atoms: the missing weights are w_k = (scale * p_k)^order / exp(log_unit)
// for family indices k > last_index.
struct TailCertificate {
  TailFamily family;
  std::int64_t last_index = 0;
  double scale = 1.0;
  int order = 1;
  double log_unit = 0.0;

  // sum_{k>K} w_k^j
  double power_weight_bound(int j = 1) const;
  // sum_{k>K} w_k ln(1/w_k); +inf when divergent
  double entropy_terms_bound() const;
  // Certificate of the order-n escort whose atoms are a_k^n / exp(log_normalizer).
  TailCertificate escort(int n, double log_normalizer) const;
};

struct PowerSum {
  int n = 1;
  double value = 1.0;
  double error_bound = 0.0;
  std::int64_t terms = 0;
};

TailFamily make_family(FamilyKind kind, double parameter = 0.0);

// eta_n = sum_k p_k^n within eps.
PowerSum power_sum(const TailFamily& family, int n, double eps,
                   std::int64_t iteration_cap = kDefaultIterationCap,
                   std::stop_token stop = {});

// Atoms first..K with certified tail_mass <= eps.
MassFunction truncate(const TailFamily& family, double eps,
                      std::int64_t iteration_cap = kDefaultIterationCap,
                      std::stop_token stop = {});

// Atoms first..K chosen so that the order-n escort tail
// sum_{k>K} p_k^n / eta_n is at most eps. The mass tail may be large; the
// certificate lets order >= n transforms bound their own error.
MassFunction truncate_for_order(const TailFamily& family, int n, double eps,
                                std::int64_t iteration_cap = kDefaultIterationCap,
                                std::stop_token stop = {});

// First K atoms renormalized into an exact finite distribution.
MassFunction family_prefix(const TailFamily& family, std::int64_t last);

// sum_{k <= K} -p_k ln p_k for each K in an increasing list.
std::vector<double> entropy_partial_sums(const TailFamily& family,
                                         std::span<const std::int64_t> ks,
                                         std::int64_t iteration_cap = kDefaultIterationCap,
                                         std::stop_token stop = {});

}  // namespace gmi
