#include "gmi/gmi_core.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "gmi/kernels.hpp"
#include "gmi/tail_families.hpp"
#include "kernels/compensated.hpp"

namespace gmi {

using kernels::detail::Compensated;

namespace {

constexpr double kClampSlack = 1e-12;
constexpr double kKappaSlack = 1e-9;

struct Escort {
  std::vector<double> atoms;
  double log_normalizer = 0.0;  // ln sum_i p_i^scale
};

// atoms_i = p_i^scale / sum_j p_j^scale via logs shifted by scale * max ln p.
Escort escort_of(std::span<const double> p, double scale) {
  const auto& k = kernels::active();
  std::vector<double> logs(p.size());
  k.log_values(p, logs);
  const double top = k.max_value(logs);
  if (!std::isfinite(top)) throw Error(ErrorCode::NumericViolation, "distribution has no mass");
  const double shift = scale * top;
  Escort e;
  e.atoms.resize(p.size());
  const double s = k.exp_affine(logs, scale, shift, e.atoms);
  for (double& v : e.atoms) v /= s;
  e.log_normalizer = shift + std::log(s);
  return e;
}

const TailCertificate& require_certificate(const TailCertificate* cert, double tail, int n,
                                           const char* what) {
  if (cert == nullptr) {
    throw Error(ErrorCode::UncertifiedTail, std::string(what) + " has tail mass " +
                                                format_real(tail) + " but no tail certificate");
  }
  if (n < 2) {
    throw Error(ErrorCode::UncertifiedTail,
                std::string(what) + " is a truncation; order n >= 2 is required for a finite, "
                                    "certified result");
  }
  return *cert;
}

// ln sum_i p_i^j (j = 0 counts the positive atoms).
double log_power_sum(std::span<const double> logs, double top, int j) {
  if (j == 0) {
    const auto positive = std::count_if(logs.begin(), logs.end(), [](double v) { return std::isfinite(v); });
    return std::log(static_cast<double>(positive));
  }
  std::vector<double> scratch(logs.size());
  const double shift = j * top;
  return shift + std::log(kernels::active().exp_affine(logs, j, shift, scratch));
}

double entropy_upper_bound(const MassFunction& mass, int n) {
  const auto& k = kernels::active();
  const auto p = mass.probabilities();
  std::vector<double> logs(p.size());
  k.log_values(p, logs);
  const double top = k.max_value(logs);
  const double ln_s_prev = log_power_sum(logs, top, n - 1);
  const double ln_s_n = log_power_sum(logs, top, n);
  const double s1 = k.sum(p);
  const double nd = static_cast<double>(n);

  if (mass.is_exact()) {
    return (nd / std::numbers::e) * s1 * std::exp(ln_s_prev - ln_s_n) + ln_s_n - nd * std::log(s1);
  }
  const TailCertificate& cert = *mass.certificate();
  auto ln_upper = [&](int j, double ln_s) {
    if (j == 0) return HUGE_VAL;
    const double t = cert.power_weight_bound(j);
    if (t == 0.0) return ln_s;
    return ln_s + std::log1p(std::exp(std::log(t) - ln_s));
  };
  const double ratio = std::exp(ln_upper(n - 1, ln_s_prev) - ln_s_n);
  const double ln_pn = ln_upper(n, ln_s_n);
  double best = -HUGE_VAL;
  for (double z : {s1, s1 + cert.power_weight_bound(1)}) {
    best = std::max(best, (nd / std::numbers::e) * z * ratio - nd * std::log(z) + ln_pn);
  }
  return best;
}

double kl_form(const JointMass& joint) {
  const auto rows = joint.row_indices();
  const auto cols = joint.col_indices();
  const auto pr = joint.rows().probabilities();
  const auto pc = joint.cols().probabilities();
  Compensated acc;
  std::size_t i = 0;
  for (const auto& c : joint.cells()) {
    while (rows[i] != c.row) ++i;  // cells are sorted by row
    const auto j = std::lower_bound(cols.begin(), cols.end(), c.col) - cols.begin();
    acc.add(c.p * (std::log(c.p) - std::log(pr[i]) - std::log(pc[j])));
  }
  return acc.value();
}

}  // namespace

Order::Order(int n) : n_(n) {
  if (n < 1) throw Error(ErrorCode::DegenerateOrder, "order must be an integer >= 1, got " + std::to_string(n));
}

MassFunction cdotc(const MassFunction& mass, Order n) {
  const Escort e = escort_of(mass.probabilities(), n.value());
  if (mass.is_exact()) {
    return MassFunction::from_parts(mass.labels(), e.atoms, 0.0, mass.tolerance());
  }
  const TailCertificate& cert =
      require_certificate(mass.certificate(), mass.tail_mass(), n.value(), "mass function");
  if (mass.tail_mode() == TailMode::Absorbed) {
    throw Error(ErrorCode::UncertifiedTail,
                "tail mass is spread over existing letters; transform the joint instead");
  }
  auto next = std::make_shared<const TailCertificate>(cert.escort(n.value(), e.log_normalizer));
  const double tail = next->power_weight_bound(1);
  return MassFunction::from_parts(mass.labels(), e.atoms, tail,
                                  std::max(mass.tolerance(), tail + 1e-12), std::move(next));
}

MassFunction cdotc_inverse(const MassFunction& mass, Order n) {
  if (!mass.is_exact()) {
    throw Error(ErrorCode::UncertifiedTail, "inverse transform requires an exact finite distribution");
  }
  const Escort e = escort_of(mass.probabilities(), 1.0 / n.value());
  return MassFunction::from_parts(mass.labels(), e.atoms, 0.0, mass.tolerance());
}

JointMass cdotc_joint(const JointMass& joint, Order n) {
  std::vector<double> p;
  p.reserve(joint.cells().size());
  for (const auto& c : joint.cells()) p.push_back(c.p);
  const Escort e = escort_of(p, n.value());
  std::vector<Cell> cells(joint.cells().begin(), joint.cells().end());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!(e.atoms[i] > 0.0)) {
      throw Error(ErrorCode::NumericViolation,
                  "order " + std::to_string(n.value()) + " underflows a positive cell to zero");
    }
    cells[i].p = e.atoms[i];
  }
  if (joint.is_exact()) {
    return JointMass::from_parts(std::move(cells), 0.0, joint.tolerance(), nullptr,
                                 TailLayout::Diagonal);
  }
  const TailCertificate& cert =
      require_certificate(joint.certificate(), joint.tail_mass(), n.value(), "joint");
  auto next = std::make_shared<const TailCertificate>(cert.escort(n.value(), e.log_normalizer));
  const double tail = next->power_weight_bound(1);
  return JointMass::from_parts(std::move(cells), tail, std::max(joint.tolerance(), tail + 1e-12),
                               std::move(next), joint.layout());
}

OrderEntropy h_n(const MassFunction& mass, Order n) {
  OrderEntropy out{EntropyValue::diverges(), 0.0};
  if (n.value() == 1) {
    if (!mass.is_exact()) {
      require_certificate(mass.certificate(), mass.tail_mass(), 1, "mass function");
    }
    out.entropy = shannon_entropy(mass);
  } else {
    out.entropy = shannon_entropy(cdotc(mass, n));
  }
  out.upper_bound = entropy_upper_bound(mass, n.value());
  if (out.entropy.is_finite()) {
    const double slack = out.entropy.error_bound() + 1e-9 * std::max(1.0, std::fabs(out.upper_bound));
    if (out.entropy.value() > out.upper_bound + slack) {
      throw Error(ErrorCode::NumericViolation,
                  "H_n exceeds its upper bound (n/e) eta_{n-1}/eta_n + ln eta_n");
    }
  }
  return out;
}

OrderEntropy h_n(const JointMass& joint, Order n) { return h_n(joint.flat(), n); }

MiValue mi_n(const JointMass& joint, Order n) {
  if (n.value() == 1 && !joint.is_exact()) {
    require_certificate(joint.certificate(), joint.tail_mass(), 1, "joint");
  }
  const JointMass escort = n.value() == 1 ? joint : cdotc_joint(joint, n);
  MiValue mi;
  mi.h_x = shannon_entropy(escort.rows());
  mi.h_y = shannon_entropy(escort.cols());
  mi.h_xy = shannon_entropy(escort.flat());
  if (!mi.h_x.is_finite() || !mi.h_y.is_finite() || !mi.h_xy.is_finite()) {
    throw Error(ErrorCode::UncertifiedTail, "an order-n entropy diverges");
  }
  mi.entropy_form = mi.h_x.value() + mi.h_y.value() - mi.h_xy.value();
  mi.error_bound = mi.h_x.error_bound() + mi.h_y.error_bound() + mi.h_xy.error_bound();
  const double kl = n.value() == 1 ? shannon_mi(joint).value() : kl_form(escort);
  if (kl < -kClampSlack) {
    throw Error(ErrorCode::NumericViolation, "MI_n = " + format_real(kl) + " is negative");
  }
  if (std::fabs(kl - mi.entropy_form) > 1e-9 * std::max(1.0, mi.h_xy.value())) {
    throw Error(ErrorCode::NumericViolation, "entropy and KL forms of MI_n disagree");
  }
  mi.value = std::max(0.0, kl);
  return mi;
}

std::optional<double> kappa_from(const MiValue& mi) {
  const double h = mi.h_xy.value();
  if (h == 0.0) return std::nullopt;
  double kappa = mi.value / h;
  if (kappa < -kKappaSlack || kappa > 1.0 + kKappaSlack) {
    throw Error(ErrorCode::NumericViolation, "kappa_n = " + format_real(kappa) + " outside [0, 1]");
  }
  if (kappa < 0.0 && kappa >= -kClampSlack) kappa = 0.0;
  if (kappa > 1.0 && kappa <= 1.0 + kClampSlack) kappa = 1.0;
  return kappa;
}

std::optional<double> kappa_n(const JointMass& joint, Order n) {
  if (joint.cells().size() == 1 && joint.is_exact()) return std::nullopt;
  return kappa_from(mi_n(joint, n));
}

GmiProfile gmi_profile(const JointMass& joint, int n_min, int n_max, unsigned workers) {
  if (n_min < 1) throw Error(ErrorCode::DegenerateOrder, "n_min must be >= 1");
  if (n_max < n_min) throw Error(ErrorCode::BadParameter, "empty order range");
  if (n_min == 1 && !joint.is_exact()) {
    throw Error(ErrorCode::UncertifiedTail, "order 1 is only available for exact finite joints");
  }
  const auto count = static_cast<std::size_t>(n_max - n_min + 1);
  GmiProfile profile;
  profile.rows.resize(count);
  std::vector<std::exception_ptr> failures(count);
  auto run_row = [&](std::size_t i) {
    try {
      const Order n(n_min + static_cast<int>(i));
      ProfileRow& row = profile.rows[i];
      row.n = n.value();
      row.mi = mi_n(joint, n);
      row.kappa = (joint.cells().size() == 1 && joint.is_exact()) ? std::nullopt : kappa_from(row.mi);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  };
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) run_row(i);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < count; i += workers) run_row(i);
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return profile;
}

}  // namespace gmi
