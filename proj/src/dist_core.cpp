#include "gmi/dist_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_set>
#include <utility>

#include "gmi/kernels.hpp"
#include "gmi/tail_families.hpp"
#include "kernels/compensated.hpp"

namespace gmi {

using kernels::detail::Compensated;

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::MassNotNormalized: return "MassNotNormalized";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::TailBoundStalls: return "TailBoundStalls";
    case ErrorCode::DegenerateOrder: return "DegenerateOrder";
    case ErrorCode::UncertifiedTail: return "UncertifiedTail";
    case ErrorCode::NumericViolation: return "NumericViolation";
    case ErrorCode::NoCollisions: return "NoCollisions";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::Cancelled: return "Cancelled";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// ---------------------------------------------------------------- Labels

Labels Labels::named(std::vector<std::string> names) {
  Labels out;
  out.store_ = std::move(names);
  return out;
}

Labels Labels::indexed(std::int64_t first, std::size_t count) {
  Labels out;
  out.store_ = Range{first, count};
  return out;
}

std::size_t Labels::size() const noexcept {
  if (const auto* r = std::get_if<Range>(&store_)) return r->count;
  return std::get<std::vector<std::string>>(store_).size();
}

std::string Labels::operator[](std::size_t i) const {
  if (const auto* r = std::get_if<Range>(&store_)) {
    return std::to_string(r->first + static_cast<std::int64_t>(i));
  }
  return std::get<std::vector<std::string>>(store_).at(i);
}

// ---------------------------------------------------------------- MassFunction

namespace {

void check_tolerance(double tolerance) {
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
    throw Error(ErrorCode::BadParameter, "tolerance must be a positive finite number");
  }
}

}  // namespace

MassFunction MassFunction::validate(std::vector<Atom> atoms, double tolerance) {
  check_tolerance(tolerance);
  std::unordered_set<std::string> seen;
  std::vector<std::string> names;
  std::vector<double> p;
  names.reserve(atoms.size());
  p.reserve(atoms.size());
  for (auto& atom : atoms) {
    if (!seen.insert(atom.label).second) {
      throw Error(ErrorCode::DuplicateLabel, "duplicate label '" + atom.label + "'");
    }
    names.push_back(std::move(atom.label));
    p.push_back(atom.p);
  }
  return from_parts(Labels::named(std::move(names)), std::move(p), 0.0, tolerance);
}

MassFunction MassFunction::from_parts(Labels labels, std::vector<double> probabilities,
                                      double tail_mass, double tolerance,
                                      std::shared_ptr<const TailCertificate> certificate,
                                      TailMode mode) {
  check_tolerance(tolerance);
  if (labels.size() != probabilities.size()) {
    throw Error(ErrorCode::BadParameter, "label count does not match probability count");
  }
  if (!(tail_mass >= 0.0) || tail_mass > 1.0 + tolerance) {
    throw Error(ErrorCode::NegativeMass, "tail mass must lie in [0, 1]");
  }
  MassFunction m;
  std::size_t support = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double v = probabilities[i];
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::NegativeMass,
                  "atom '" + labels[i] + "' has invalid probability " + format_real(v));
    }
    if (v > 0.0) ++support;
  }
  const double total = kernels::active().sum(probabilities) + tail_mass;
  if (std::fabs(total - 1.0) > tolerance) {
    throw Error(ErrorCode::MassNotNormalized,
                "probabilities sum to " + format_real(total) + ", outside 1 +/- " +
                    format_real(tolerance));
  }
  m.labels_ = std::move(labels);
  m.p_ = std::move(probabilities);
  m.tail_mass_ = tail_mass;
  m.tolerance_ = tolerance;
  m.support_ = support;
  m.certificate_ = std::move(certificate);
  m.mode_ = mode;
  return m;
}

// ---------------------------------------------------------------- EntropyValue

EntropyValue EntropyValue::finite(double value, double error_bound) {
  EntropyValue e;
  e.finite_ = true;
  e.value_ = value;
  e.error_bound_ = error_bound;
  return e;
}

double EntropyValue::value() const {
  if (!finite_) throw Error(ErrorCode::NumericViolation, "entropy diverges; no finite value");
  return value_;
}

double EntropyValue::error_bound() const {
  if (!finite_) throw Error(ErrorCode::NumericViolation, "entropy diverges; no error bound");
  return error_bound_;
}

// ---------------------------------------------------------------- JointMass

namespace {

void sort_and_check_cells(std::vector<Cell>& cells) {
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    return std::pair(a.row, a.col) < std::pair(b.row, b.col);
  });
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (cells[i].row == cells[i - 1].row && cells[i].col == cells[i - 1].col) {
      throw Error(ErrorCode::DuplicateCell, "duplicate cell (" + std::to_string(cells[i].row) +
                                                ", " + std::to_string(cells[i].col) + ")");
    }
  }
}

std::vector<std::string> index_names(std::span<const std::int64_t> idx) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(std::to_string(i));
  return out;
}

}  // namespace

JointMass JointMass::from_entries(std::vector<Cell> entries, double tolerance) {
  check_tolerance(tolerance);
  for (const auto& c : entries) {
    if (!(c.p >= 0.0) || !std::isfinite(c.p)) {
      throw Error(ErrorCode::NegativeMass, "cell (" + std::to_string(c.row) + ", " +
                                               std::to_string(c.col) + ") has invalid probability");
    }
    if (c.row < 0 || c.col < 0) {
      throw Error(ErrorCode::BadParameter, "cell indices must be nonnegative");
    }
  }
  // Duplicates are detected before zero cells are dropped.
  sort_and_check_cells(entries);
  std::erase_if(entries, [](const Cell& c) { return c.p == 0.0; });
  return build(std::move(entries), 0.0, tolerance, nullptr, TailLayout::Diagonal);
}

JointMass JointMass::from_parts(std::vector<Cell> cells, double tail_mass, double tolerance,
                                std::shared_ptr<const TailCertificate> certificate,
                                TailLayout layout) {
  check_tolerance(tolerance);
  for (const auto& c : cells) {
    if (!(c.p > 0.0) || !std::isfinite(c.p)) {
      throw Error(ErrorCode::NegativeMass, "stored cells must be positive");
    }
  }
  sort_and_check_cells(cells);
  return build(std::move(cells), tail_mass, tolerance, std::move(certificate), layout);
}

JointMass JointMass::build(std::vector<Cell> cells, double tail_mass, double tolerance,
                           std::shared_ptr<const TailCertificate> certificate, TailLayout layout) {
  JointMass j;
  std::vector<double> probs;
  probs.reserve(cells.size());
  for (const auto& c : cells) probs.push_back(c.p);
  const double total = kernels::active().sum(probs) + tail_mass;
  if (std::fabs(total - 1.0) > tolerance) {
    throw Error(ErrorCode::MassNotNormalized, "joint mass sums to " + format_real(total) +
                                                  ", outside 1 +/- " + format_real(tolerance));
  }

  // Row sums in ascending (row, col) order.
  std::vector<std::int64_t> rows;
  std::vector<double> row_p;
  {
    std::size_t i = 0;
    while (i < cells.size()) {
      Compensated acc;
      const auto r = cells[i].row;
      for (; i < cells.size() && cells[i].row == r; ++i) acc.add(cells[i].p);
      rows.push_back(r);
      row_p.push_back(acc.value());
    }
  }
  std::vector<std::int64_t> cols;
  std::vector<double> col_p;
  {
    std::vector<std::size_t> order(cells.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cells[a].col < cells[b].col; });
    std::size_t i = 0;
    while (i < order.size()) {
      Compensated acc;
      const auto c = cells[order[i]].col;
      for (; i < order.size() && cells[order[i]].col == c; ++i) acc.add(cells[order[i]].p);
      cols.push_back(c);
      col_p.push_back(acc.value());
    }
  }

  const TailMode row_mode =
      (certificate && layout == TailLayout::OddEven) ? TailMode::Absorbed : TailMode::NewAtoms;
  j.rows_ = MassFunction::from_parts(Labels::named(index_names(rows)), std::move(row_p), tail_mass,
                                     tolerance, certificate, row_mode);
  j.cols_ = MassFunction::from_parts(Labels::named(index_names(cols)), std::move(col_p), tail_mass,
                                     tolerance, certificate, TailMode::NewAtoms);
  j.row_index_ = std::move(rows);
  j.col_index_ = std::move(cols);
  j.cells_ = std::move(cells);
  j.tolerance_ = tolerance;
  j.tail_mass_ = tail_mass;
  j.certificate_ = std::move(certificate);
  j.layout_ = layout;
  return j;
}

std::optional<double> JointMass::find(std::int64_t row, std::int64_t col) const {
  auto it = std::lower_bound(cells_.begin(), cells_.end(), std::pair(row, col),
                             [](const Cell& c, const std::pair<std::int64_t, std::int64_t>& key) {
                               return std::pair(c.row, c.col) < key;
                             });
  if (it != cells_.end() && it->row == row && it->col == col) return it->p;
  return std::nullopt;
}

MassFunction JointMass::flat() const {
  std::vector<std::string> names;
  std::vector<double> p;
  names.reserve(cells_.size());
  p.reserve(cells_.size());
  for (const auto& c : cells_) {
    names.push_back(std::to_string(c.row) + "," + std::to_string(c.col));
    p.push_back(c.p);
  }
  return MassFunction::from_parts(Labels::named(std::move(names)), std::move(p), tail_mass_,
                                  tolerance_, certificate_, TailMode::NewAtoms);
}

// ---------------------------------------------------------------- operations

MassFunction validate_mass(std::vector<Atom> atoms, double tolerance) {
  return MassFunction::validate(std::move(atoms), tolerance);
}

JointMass joint_from_entries(std::vector<Cell> entries, double tolerance) {
  return JointMass::from_entries(std::move(entries), tolerance);
}

JointMass product_joint(const MassFunction& px, const MassFunction& py) {
  if (!px.is_exact() || !py.is_exact()) {
    throw Error(ErrorCode::UncertifiedTail, "product_joint requires exact finite marginals");
  }
  std::vector<Cell> cells;
  cells.reserve(px.support_size() * py.support_size());
  const auto a = px.probabilities();
  const auto b = py.probabilities();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      cells.push_back({static_cast<std::int64_t>(i + 1), static_cast<std::int64_t>(j + 1),
                       a[i] * b[j]});
    }
  }
  return JointMass::from_entries(std::move(cells), std::max(px.tolerance(), py.tolerance()));
}

bool is_one_to_one(const JointMass& joint) {
  // Marginals are built only from stored (positive) cells, so a positive row
  // is one that appears at all.
  const auto cells = joint.cells();
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (cells[i].row == cells[i - 1].row) return false;
  }
  std::vector<std::int64_t> cols;
  cols.reserve(cells.size());
  for (const auto& c : cells) cols.push_back(c.col);
  std::sort(cols.begin(), cols.end());
  return std::adjacent_find(cols.begin(), cols.end()) == cols.end();
}

double factorization_residual(const JointMass& joint) {
  const auto rows = joint.row_indices();
  const auto cols = joint.col_indices();
  const auto pr = joint.rows().probabilities();
  const auto pc = joint.cols().probabilities();
  double worst = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double cell = joint.find(rows[i], cols[j]).value_or(0.0);
      worst = std::max(worst, std::fabs(cell - pr[i] * pc[j]));
    }
  }
  return worst;
}

namespace {

// Fannes-Audenaert continuity bound for a d-letter distribution at total
// variation distance delta.
double continuity_bound(double delta, std::size_t letters) {
  const double d = static_cast<double>(std::max<std::size_t>(letters, 2));
  if (delta >= 1.0 - 1.0 / d) return std::log(d);
  if (delta <= 0.0) return 0.0;
  const double binary = -delta * std::log(delta) - (1.0 - delta) * std::log1p(-delta);
  return delta * std::log(d - 1.0) + binary;
}

}  // namespace

EntropyValue shannon_entropy(const MassFunction& mass) {
  const auto& k = kernels::active();
  const auto p = mass.probabilities();
  const double terms = k.neg_xlogx_sum(p);
  if (mass.is_exact()) return EntropyValue::finite(terms, 0.0);

  const TailCertificate* cert = mass.certificate();
  if (cert == nullptr) {
    throw Error(ErrorCode::UncertifiedTail,
                "mass has tail " + format_real(mass.tail_mass()) + " but no tail certificate");
  }
  // Entropy of the atoms renormalized to their own total S.
  const double s = k.sum(p);
  const double value = std::log(s) + terms / s;
  const double tail = cert->power_weight_bound(1);

  if (mass.tail_mode() == TailMode::Absorbed) {
    return EntropyValue::finite(value, continuity_bound(tail / s, mass.support_size()));
  }
  const double tail_terms = cert->entropy_terms_bound();
  if (!std::isfinite(tail_terms)) return EntropyValue::diverges();
  // With true total W = S + T: H - H~ = ln(1 + T/S) + Bt/W - B T / (S W).
  const double error = tail / s + tail_terms / s + terms * tail / (s * s);
  return EntropyValue::finite(value, error);
}

EntropyValue shannon_mi(const JointMass& joint) {
  if (!joint.is_exact()) {
    throw Error(ErrorCode::UncertifiedTail,
                "Shannon MI is only defined here for exact finite joints; use mi_n with n >= 2");
  }
  const auto rows = joint.row_indices();
  const auto cols = joint.col_indices();
  const auto pr = joint.rows().probabilities();
  const auto pc = joint.cols().probabilities();
  Compensated acc;
  for (const auto& c : joint.cells()) {
    const auto i = std::lower_bound(rows.begin(), rows.end(), c.row) - rows.begin();
    const auto j = std::lower_bound(cols.begin(), cols.end(), c.col) - cols.begin();
    acc.add(c.p * (std::log(c.p) - std::log(pr[i]) - std::log(pc[j])));
  }
  return EntropyValue::finite(acc.value(), 0.0);
}

}  // namespace gmi
