#include "gmi/fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "gmi/tail_families.hpp"
#include "kernels/compensated.hpp"

namespace gmi {

namespace {

using kernels::detail::Compensated;

std::vector<Cell> layout_cells(const MassFunction& mass, std::int64_t first, TailLayout layout) {
  const auto p = mass.probabilities();
  std::vector<Cell> cells;
  cells.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::int64_t k = first + static_cast<std::int64_t>(i);
    if (layout == TailLayout::Diagonal) {
      cells.push_back({k, k, p[i]});
    } else {
      cells.push_back({k % 2 == 1 ? 1 : 2, k, p[i]});
    }
  }
  return cells;
}

JointMass from_truncation(const MassFunction& mass, TailLayout layout) {
  auto cells = layout_cells(mass, mass.certificate()->family.first_index(), layout);
  return JointMass::from_parts(std::move(cells), mass.tail_mass(), mass.tolerance(),
                               mass.certificate_ptr(), layout);
}

void check_m(std::int64_t m) {
  if (m < 1) throw Error(ErrorCode::BadParameter, "m must be >= 1");
}

}  // namespace

JointMass diagonal_log_squared(double eps, int n) {
  return from_truncation(truncate_for_order(TailFamily::log_squared(), n, eps), TailLayout::Diagonal);
}

JointMass odd_even_log_squared(double eps, int n) {
  return from_truncation(truncate_for_order(TailFamily::log_squared(), n, eps), TailLayout::OddEven);
}

JointMass perturbed_uniform(std::int64_t m, double eps, int n) {
  check_m(m);
  const double e = 1.0 / static_cast<double>(m);
  const MassFunction mass = truncate_for_order(TailFamily::log_squared(), n, eps);
  const double corner = 0.25 - e / 4.0;
  std::vector<Cell> cells;
  if (corner > 0.0) {
    cells = {{1, 1, corner}, {1, 2, corner}, {2, 1, corner}, {2, 2, corner}};
  }
  const auto p = mass.probabilities();
  const std::int64_t first = mass.certificate()->family.first_index();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::int64_t k = first + static_cast<std::int64_t>(i);
    cells.push_back({k, k, e * p[i]});
  }
  auto cert = std::make_shared<TailCertificate>(*mass.certificate());
  cert->scale = e;
  return JointMass::from_parts(std::move(cells), e * mass.tail_mass(),
                               std::max(kDefaultTolerance, e * mass.tolerance() + 1e-12),
                               std::move(cert), TailLayout::Diagonal);
}

JointMass odd_even_prefix(std::int64_t last) {
  const TailFamily family = TailFamily::log_squared();
  const MassFunction mass = family_prefix(family, last);
  return JointMass::from_parts(layout_cells(mass, family.first_index(), TailLayout::OddEven), 0.0,
                               mass.tolerance(), nullptr, TailLayout::OddEven);
}

Bounded perturbed_uniform_distance(std::int64_t m) {
  check_m(m);
  const double e = 1.0 / static_cast<double>(m);
  const PowerSum eta2 = power_sum(TailFamily::log_squared(), 2, 1e-12);
  // Four corner cells each off by e/4, diagonal cells off by e p_k.
  const double r = std::sqrt(0.25 + eta2.value);
  return {e * r, e * eta2.error_bound / (2.0 * r)};
}

std::vector<double> perturbed_uniform_kl_partial_sums(std::int64_t m,
                                                      std::span<const std::int64_t> ks) {
  check_m(m);
  const TailFamily family = TailFamily::log_squared();
  const double e = 1.0 / static_cast<double>(m);
  const std::vector<double> entropy = entropy_partial_sums(family, ks);
  // Corner rows and columns carry 1/2 - e/2, so each corner term is
  // (1/4 - e/4) ln(1/(1 - e)).
  const double corners = e < 1.0 ? -(1.0 - e) * std::log1p(-e) : 0.0;
  std::vector<double> out;
  out.reserve(ks.size());
  Compensated mass;
  std::int64_t k = family.first_index();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    for (; k <= ks[i]; ++k) mass.add(family.term(k));
    // Diagonal cells: e p_k ln(1 / (e p_k)).
    out.push_back(corners - e * std::log(e) * mass.value() + e * entropy[i]);
  }
  return out;
}

}  // namespace gmi
