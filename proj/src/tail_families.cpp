#include "gmi/tail_families.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gmi/kernels.hpp"
#include "kernels/compensated.hpp"

namespace gmi {

using kernels::detail::Compensated;

namespace {

constexpr std::int64_t kChunk = 1 << 14;
// Relative slack applied to every analytic bound to absorb rounding in the
// closed forms themselves.
constexpr double kBoundSlack = 1e-9;

struct Normalizer {
  double value;
  double rel_error;
};

// sum_{k=first}^{n} exp(scale * ln k) plus a convex bracket on the rest,
// where `integral(a)` is the integral of the term over [a, inf).
template <class LogTerm, class Integral>
Normalizer convex_series(std::int64_t first, std::int64_t n, LogTerm&& log_term,
                         Integral&& integral) {
  // Always scalar: the constants must not depend on the dispatched ISA.
  const auto& k = kernels::scalar_table();
  std::vector<double> buf(kChunk);
  std::vector<double> out(kChunk);
  Compensated total;
  for (std::int64_t start = first; start <= n; start += kChunk) {
    const auto count = static_cast<std::size_t>(std::min<std::int64_t>(kChunk, n - start + 1));
    for (std::size_t i = 0; i < count; ++i) buf[i] = log_term(static_cast<double>(start) + i);
    total.add(k.exp_affine({buf.data(), count}, 1.0, 0.0, {out.data(), count}));
  }
  const double next = std::exp(log_term(static_cast<double>(n + 1)));
  const double lower = integral(static_cast<double>(n + 1)) + 0.5 * next;
  const double upper = integral(static_cast<double>(n) + 0.5);
  const double value = total.value() + 0.5 * (lower + upper);
  return {value, 0.5 * (upper - lower) / value + 4e-15};
}

double log_squared_log_term(double x) {
  const double lx = std::log(x);
  return -(lx + 2.0 * std::log(lx));
}

const Normalizer& log_squared_normalizer() {
  // sum_{k>=3} 1/(k ln^2 k); the integral of the term over [a, inf) is 1/ln a.
  static const Normalizer sum = convex_series(3, 1 << 20, log_squared_log_term,
                                              [](double a) { return 1.0 / std::log(a); });
  return sum;
}

Normalizer zeta(double alpha) {
  return convex_series(
      1, 1 << 16, [alpha](double x) { return -alpha * std::log(x); },
      [alpha](double lo) { return std::pow(lo, 1.0 - alpha) / (alpha - 1.0); });
}

// Integral over [a, inf) of x^{-beta} ln x, beta > 1.
double integral_power_log(double a, double beta) {
  const double b1 = beta - 1.0;
  return std::pow(a, -b1) * (std::log(a) / b1 + 1.0 / (b1 * b1));
}

// Smallest K in [start, cap] with bound(K) <= target, or -1.
template <class Bound>
std::int64_t smallest_index(Bound&& bound, std::int64_t start, double target, std::int64_t cap) {
  std::int64_t hi = std::max<std::int64_t>(start, 1);
  while (!(bound(hi) <= target)) {
    if (hi >= cap) return -1;
    hi = std::min(cap, hi * 2);
  }
  std::int64_t lo = std::max(start, hi / 2);
  if (lo == hi || bound(lo) <= target) return lo == hi ? hi : lo;
  // bound(lo) > target >= bound(hi)
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (bound(mid) <= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

void check_cancel(const std::stop_token& stop) {
  if (stop.stop_requested()) throw Error(ErrorCode::Cancelled, "summation cancelled by caller");
}

// Calls fn(first_k, log_terms) over consecutive chunks of [first, last].
template <class Fn>
void for_each_chunk(const TailFamily& f, std::int64_t first, std::int64_t last,
                    const std::stop_token& stop, Fn&& fn) {
  std::vector<double> buf(static_cast<std::size_t>(std::min<std::int64_t>(
      kChunk, std::max<std::int64_t>(last - first + 1, 1))));
  for (std::int64_t k = first; k <= last; k += kChunk) {
    check_cancel(stop);
    const auto count = static_cast<std::size_t>(std::min<std::int64_t>(kChunk, last - k + 1));
    std::span<double> chunk(buf.data(), count);
    f.log_terms(k, chunk);
    fn(k, std::span<const double>(chunk));
  }
}

}  // namespace

// ---------------------------------------------------------------- TailFamily

TailFamily::TailFamily(FamilyKind kind, double parameter) : kind_(kind), parameter_(parameter) {
  switch (kind) {
    case FamilyKind::Geometric:
      if (!(parameter > 0.0 && parameter < 1.0)) {
        throw Error(ErrorCode::BadParameter, "Geometric requires 0 < q < 1");
      }
      normalizer_ = 1.0 / (1.0 - parameter);
      break;
    case FamilyKind::PowerLaw: {
      if (!(parameter > 1.0) || !std::isfinite(parameter)) {
        throw Error(ErrorCode::BadParameter, "PowerLaw requires alpha > 1");
      }
      const auto z = zeta(parameter);
      normalizer_ = z.value;
      normalizer_rel_error_ = z.rel_error;
      break;
    }
    case FamilyKind::LogSquared: {
      const auto& s = log_squared_normalizer();
      normalizer_ = 1.0 / s.value;
      normalizer_rel_error_ = s.rel_error;
      parameter_ = 0.0;
      break;
    }
  }
  log_normalizer_ = std::log(normalizer_);
}

TailFamily TailFamily::geometric(double q) { return TailFamily(FamilyKind::Geometric, q); }
TailFamily TailFamily::power_law(double alpha) { return TailFamily(FamilyKind::PowerLaw, alpha); }
TailFamily TailFamily::log_squared() { return TailFamily(FamilyKind::LogSquared, 0.0); }
TailFamily TailFamily::make(FamilyKind kind, double parameter) { return TailFamily(kind, parameter); }

std::string TailFamily::name() const {
  char buf[64];
  switch (kind_) {
    case FamilyKind::Geometric:
      std::snprintf(buf, sizeof buf, "Geometric(%.12g)", parameter_);
      return buf;
    case FamilyKind::PowerLaw:
      std::snprintf(buf, sizeof buf, "PowerLaw(%.12g)", parameter_);
      return buf;
    case FamilyKind::LogSquared:
      return "LogSquared";
  }
  return "?";
}

EntropyClass TailFamily::entropy_class() const noexcept {
  return kind_ == FamilyKind::LogSquared ? EntropyClass::Infinite : EntropyClass::Finite;
}

double TailFamily::term(std::int64_t k) const {
  if (k < first_index()) return 0.0;
  const double x = static_cast<double>(k);
  switch (kind_) {
    case FamilyKind::Geometric:
      return (1.0 - parameter_) * std::pow(parameter_, x - 1.0);
    case FamilyKind::PowerLaw:
      return std::pow(x, -parameter_) / normalizer_;
    case FamilyKind::LogSquared: {
      const double lx = std::log(x);
      return normalizer_ / (x * lx * lx);
    }
  }
  return 0.0;
}

double TailFamily::log_term(std::int64_t k) const {
  if (k < first_index()) return -HUGE_VAL;
  const double x = static_cast<double>(k);
  switch (kind_) {
    case FamilyKind::Geometric:
      return std::log1p(-parameter_) + (x - 1.0) * std::log(parameter_);
    case FamilyKind::PowerLaw:
      return -parameter_ * std::log(x) - log_normalizer_;
    case FamilyKind::LogSquared: {
      const double lx = std::log(x);
      return log_normalizer_ - lx - 2.0 * std::log(lx);
    }
  }
  return -HUGE_VAL;
}

void TailFamily::log_terms(std::int64_t first, std::span<double> out) const {
  const auto& k = kernels::active();
  if (kind_ == FamilyKind::Geometric) {
    const double a = std::log1p(-parameter_);
    const double b = std::log(parameter_);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = a + static_cast<double>(first - 1 + static_cast<std::int64_t>(i)) * b;
    }
    return;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<double>(first + static_cast<std::int64_t>(i));
  }
  k.log_values(out, out);
  if (kind_ == FamilyKind::PowerLaw) {
    for (double& v : out) v = -parameter_ * v - log_normalizer_;
    return;
  }
  std::vector<double> loglog(out.size());
  k.log_values(out, loglog);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::int64_t idx = first + static_cast<std::int64_t>(i);
    out[i] = idx < 3 ? -HUGE_VAL : log_normalizer_ - out[i] - 2.0 * loglog[i];
  }
}

TailBracket TailFamily::tail_mass(std::int64_t last) const {
  if (last < first_index()) return {1.0, 1.0};
  const double x = static_cast<double>(last);
  TailBracket b;
  switch (kind_) {
    case FamilyKind::Geometric: {
      const double t = std::pow(parameter_, x);
      return {t * (1.0 - kBoundSlack), std::min(1.0, t * (1.0 + kBoundSlack))};
    }
    case FamilyKind::PowerLaw: {
      const double a = parameter_;
      b.lower = (std::pow(x + 1.0, 1.0 - a) / (a - 1.0) + 0.5 * std::pow(x + 1.0, -a)) / normalizer_;
      b.upper = std::pow(x + 0.5, 1.0 - a) / (a - 1.0) / normalizer_;
      break;
    }
    case FamilyKind::LogSquared: {
      const double l1 = std::log(x + 1.0);
      b.lower = normalizer_ * (1.0 / l1 + 0.5 / ((x + 1.0) * l1 * l1));
      b.upper = normalizer_ / std::log(x + 0.5);
      break;
    }
  }
  const double slack = normalizer_rel_error_ + kBoundSlack;
  b.lower = std::max(0.0, b.lower * (1.0 - slack));
  b.upper = std::min(1.0, b.upper * (1.0 + slack));
  return b;
}

double TailFamily::family_power_tail(std::int64_t last, double s) const {
  const double x = static_cast<double>(last);
  switch (kind_) {
    case FamilyKind::Geometric: {
      const double q = parameter_;
      return std::pow(1.0 - q, s) * std::pow(q, s * x) / (1.0 - std::pow(q, s));
    }
    case FamilyKind::PowerLaw: {
      const double beta = parameter_ * s;
      if (!(beta > 1.0)) return HUGE_VAL;
      return std::pow(normalizer_, -s) * std::pow(x + 0.5, 1.0 - beta) / (beta - 1.0);
    }
    case FamilyKind::LogSquared: {
      if (s < 1.0) return HUGE_VAL;
      if (s == 1.0) return normalizer_ / std::log(x + 0.5);
      return std::pow(normalizer_, s) * std::pow(std::log(x + 1.0), -2.0 * s) *
             std::pow(x + 0.5, 1.0 - s) / (s - 1.0);
    }
  }
  return HUGE_VAL;
}

double TailFamily::power_tail_bound(std::int64_t last, double s) const {
  if (!(s >= 1.0)) {
    // Only the geometric family keeps sub-linear powers summable.
    if (kind_ != FamilyKind::Geometric || !(s > 0.0)) return HUGE_VAL;
  }
  last = std::max(last, first_index() - 1);
  double bound = family_power_tail(last, s);
  if (s >= 1.0) {
    // Monotone terms: p_k^s <= p_{K+1}^{s-1} p_k for k > K.
    const double mono = std::pow(term(last + 1), s - 1.0) * tail_mass(last).upper;
    bound = std::min(bound, mono);
  }
  return bound * (1.0 + s * normalizer_rel_error_ + kBoundSlack);
}

double TailFamily::entropy_tail_bound(std::int64_t last, double s) const {
  last = std::max(last, first_index() - 1);
  const double x = static_cast<double>(last);
  double bound = HUGE_VAL;
  switch (kind_) {
    case FamilyKind::Geometric: {
      const double q = parameter_;
      const double a = -std::log1p(-q);
      const double b = -std::log(q);
      const double rho = std::pow(q, s);
      const double head = std::pow(1.0 - q, s) * std::pow(rho, x);
      bound = head * (a / (1.0 - rho) + b * (x * (1.0 - rho) + rho) / ((1.0 - rho) * (1.0 - rho)));
      break;
    }
    case FamilyKind::PowerLaw: {
      const double alpha = parameter_;
      const double beta = alpha * s;
      if (!(beta > 1.0)) return HUGE_VAL;
      // x^{-beta} (alpha ln x + ln zeta) decreases once alpha ln x + ln zeta > 1/s.
      const double turn = std::exp((1.0 / s - log_normalizer_) / alpha);
      std::int64_t start = last;
      Compensated explicit_terms;
      while (static_cast<double>(start) < turn) {
        ++start;
        const double lp = log_term(start);
        explicit_terms.add(std::exp(s * lp) * -lp);
      }
      const double a = static_cast<double>(start);
      const double integral = alpha * integral_power_log(a, beta) +
                              log_normalizer_ * std::pow(a, 1.0 - beta) / (beta - 1.0);
      bound = explicit_terms.value() + std::pow(normalizer_, -s) * integral;
      break;
    }
    case FamilyKind::LogSquared: {
      if (!(s > 1.0)) return HUGE_VAL;
      // ln(1/p_k) = ln k + 2 ln ln k - ln c <= (1 + 2/e) ln k + max(0, -ln c).
      const double turn = std::exp(1.0 / s);  // x^{-s} ln x decreases beyond
      double power_log;
      if (x >= turn) {
        power_log = integral_power_log(x, s);
      } else {
        const double y = x + 1.0;
        power_log = std::pow(y, -s) * std::log(y) + integral_power_log(y, s);
      }
      const double scale = std::pow(normalizer_, s) * std::pow(std::log(x + 1.0), -2.0 * s);
      bound = (1.0 + 2.0 / std::numbers::e) * scale * power_log +
              std::max(0.0, -log_normalizer_) * power_tail_bound(last, s);
      break;
    }
  }
  return bound * (1.0 + s * normalizer_rel_error_ + kBoundSlack);
}

// ---------------------------------------------------------------- TailCertificate

double TailCertificate::power_weight_bound(int j) const {
  const double s = static_cast<double>(order) * j;
  const double pt = family.power_tail_bound(last_index, s);
  if (pt == 0.0) return 0.0;
  if (!std::isfinite(pt)) return HUGE_VAL;
  return std::exp(s * std::log(scale) - j * log_unit + std::log(pt));
}

double TailCertificate::entropy_terms_bound() const {
  const double s = static_cast<double>(order);
  const double e = family.entropy_tail_bound(last_index, s);
  if (!std::isfinite(e)) return HUGE_VAL;
  const double pt = family.power_tail_bound(last_index, s);
  if (pt == 0.0 && e == 0.0) return 0.0;
  const double factor = std::exp(s * std::log(scale) - log_unit);
  return factor * (s * e + s * std::log(1.0 / scale) * pt + std::max(0.0, log_unit) * pt);
}

TailCertificate TailCertificate::escort(int n, double log_normalizer) const {
  TailCertificate out = *this;
  out.order = order * n;
  out.log_unit = n * log_unit + log_normalizer;
  return out;
}

// ---------------------------------------------------------------- operations

TailFamily make_family(FamilyKind kind, double parameter) { return TailFamily::make(kind, parameter); }

PowerSum power_sum(const TailFamily& family, int n, double eps, std::int64_t iteration_cap,
                   std::stop_token stop) {
  if (n < 1) throw Error(ErrorCode::DegenerateOrder, "order must be >= 1");
  if (!(eps > 0.0)) throw Error(ErrorCode::BadParameter, "eps must be > 0");
  if (n == 1) return {1, 1.0, 0.0, 0};

  const std::int64_t first = family.first_index();
  const double target = 0.5 * eps;
  auto bound = [&](std::int64_t last) { return family.power_tail_bound(last, n); };
  const std::int64_t last = smallest_index(bound, first, target, iteration_cap + first - 1);
  if (last < 0) {
    throw Error(ErrorCode::TailBoundStalls,
                family.name() + ": eta_" + std::to_string(n) + " to within " + format_real(eps) +
                    " needs more than " + std::to_string(iteration_cap) + " terms");
  }
  const auto& k = kernels::active();
  Compensated total;
  std::vector<double> out(kChunk);
  for_each_chunk(family, first, last, stop, [&](std::int64_t, std::span<const double> logs) {
    total.add(k.exp_affine(logs, n, 0.0, {out.data(), logs.size()}));
  });
  const double value = total.value();
  const double rounding = value * (n * family.normalizer_rel_error() + 1e-14);
  return {n, value, bound(last) + rounding, last - first + 1};
}

namespace {

MassFunction materialize(const TailFamily& family, std::int64_t last, std::stop_token stop) {
  const std::int64_t first = family.first_index();
  const auto count = static_cast<std::size_t>(last - first + 1);
  std::vector<double> atoms(count);
  const auto& k = kernels::active();
  for_each_chunk(family, first, last, stop, [&](std::int64_t start, std::span<const double> logs) {
    k.exp_affine(logs, 1.0, 0.0,
                 {atoms.data() + static_cast<std::size_t>(start - first), logs.size()});
  });
  const TailBracket tail = family.tail_mass(last);
  const double tolerance = std::max(
      kDefaultTolerance, 2.0 * (tail.upper - tail.lower + family.normalizer_rel_error()) + 1e-12);
  auto cert = std::make_shared<const TailCertificate>(TailCertificate{family, last});
  return MassFunction::from_parts(Labels::indexed(first, count), std::move(atoms), tail.upper,
                                  tolerance, std::move(cert));
}

}  // namespace

MassFunction truncate(const TailFamily& family, double eps, std::int64_t iteration_cap,
                      std::stop_token stop) {
  if (!(eps > 0.0)) throw Error(ErrorCode::BadParameter, "eps must be > 0");
  const std::int64_t first = family.first_index();
  auto bound = [&](std::int64_t last) { return family.tail_mass(last).upper; };
  const std::int64_t last = smallest_index(bound, first, eps, iteration_cap + first - 1);
  if (last < 0) {
    std::string hint;
    if (family.kind() == FamilyKind::LogSquared) {
      hint = "; the LogSquared mass tail decays like c/ln K, so eps=" + format_real(eps) +
             " needs ln K ~ " + format_real(family.normalizer() / eps) +
             ". Request eps >= ~0.06, use truncate_for_order with n >= 2, or use "
             "entropy_partial_sums";
    }
    throw Error(ErrorCode::TailBoundStalls, family.name() + ": tail mass <= " + format_real(eps) +
                                                " needs more than " +
                                                std::to_string(iteration_cap) + " terms" + hint);
  }
  return materialize(family, last, std::move(stop));
}

MassFunction truncate_for_order(const TailFamily& family, int n, double eps,
                                std::int64_t iteration_cap, std::stop_token stop) {
  if (n < 2) throw Error(ErrorCode::DegenerateOrder, "order-n truncation requires n >= 2");
  if (!(eps > 0.0)) throw Error(ErrorCode::BadParameter, "eps must be > 0");
  const std::int64_t first = family.first_index();
  // Lower bound on eta_n from the leading terms.
  Compensated head;
  for (std::int64_t k = first; k < first + 64; ++k) head.add(std::pow(family.term(k), n));
  const double eta_lower = head.value();
  auto bound = [&](std::int64_t last) { return family.power_tail_bound(last, n) / eta_lower; };
  const std::int64_t last =
      smallest_index(bound, first, eps, iteration_cap + first - 1);
  if (last < 0) {
    throw Error(ErrorCode::TailBoundStalls, family.name() + ": order-" + std::to_string(n) +
                                                " tail <= " + format_real(eps) + " needs more than " +
                                                std::to_string(iteration_cap) + " terms");
  }
  return materialize(family, last, std::move(stop));
}

MassFunction family_prefix(const TailFamily& family, std::int64_t last) {
  const std::int64_t first = family.first_index();
  if (last < first) throw Error(ErrorCode::BadParameter, "prefix must contain at least one atom");
  const auto count = static_cast<std::size_t>(last - first + 1);
  std::vector<double> atoms(count);
  const auto& k = kernels::active();
  Compensated total;
  for_each_chunk(family, first, last, {}, [&](std::int64_t start, std::span<const double> logs) {
    total.add(k.exp_affine(logs, 1.0, 0.0,
                           {atoms.data() + static_cast<std::size_t>(start - first), logs.size()}));
  });
  const double s = total.value();
  for (double& a : atoms) a /= s;
  return MassFunction::from_parts(Labels::indexed(first, count), std::move(atoms), 0.0,
                                  kDefaultTolerance);
}

std::vector<double> entropy_partial_sums(const TailFamily& family,
                                         std::span<const std::int64_t> ks,
                                         std::int64_t iteration_cap, std::stop_token stop) {
  for (std::size_t i = 1; i < ks.size(); ++i) {
    if (ks[i] <= ks[i - 1]) throw Error(ErrorCode::BadParameter, "Ks must be strictly increasing");
  }
  std::vector<double> out;
  out.reserve(ks.size());
  if (ks.empty()) return out;
  if (ks.back() > iteration_cap) {
    throw Error(ErrorCode::TailBoundStalls,
                "partial sums beyond " + std::to_string(iteration_cap) + " terms requested");
  }
  const auto& k = kernels::active();
  Compensated total;
  std::int64_t next = family.first_index();
  for (const std::int64_t stop_at : ks) {
    if (stop_at >= next) {
      for_each_chunk(family, next, stop_at, stop, [&](std::int64_t, std::span<const double> logs) {
        total.add(k.exp_moments(logs, 1.0, 0.0).neg_ylogy);
      });
      next = stop_at + 1;
    }
    out.push_back(total.value());
  }
  return out;
}

}  // namespace gmi
