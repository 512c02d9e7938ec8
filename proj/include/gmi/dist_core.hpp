#pragma once
// Finite-support mass functions, sparse joints, and their Shannon measures.
//
// All quantities are in nats. Objects are immutable once built; every
// factory validates and throws gmi::Error on bad input.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gmi/error.hpp"

namespace gmi {

inline constexpr double kDefaultTolerance = 1e-9;

struct TailCertificate;  // tail_families.hpp

// How the unrepresented remainder of a truncated mass relates to the atoms:
// NewAtoms - it lives on letters not present in the atom list;
// Absorbed - it adds to letters already present (e.g. a two-row marginal
// of an infinite joint).
enum class TailMode { NewAtoms, Absorbed };

struct Atom {
  std::string label;
  double p = 0.0;
};

// Atom labels: either explicit opaque tokens or a run of family indices
// first, first+1, ... rendered as decimal strings.
class Labels {
 public:
  Labels() = default;
  static Labels named(std::vector<std::string> names);
  static Labels indexed(std::int64_t first, std::size_t count);

  std::size_t size() const noexcept;
  std::string operator[](std::size_t i) const;
  bool is_indexed() const noexcept { return std::holds_alternative<Range>(store_); }

 private:
  struct Range {
    std::int64_t first = 0;
    std::size_t count = 0;
  };
  std::variant<std::vector<std::string>, Range> store_;
};

class MassFunction {
 public:
  // Exact finite distribution; tail_mass is 0.
  static MassFunction validate(std::vector<Atom> atoms, double tolerance = kDefaultTolerance);

  // Lower-level factory used by truncations and transforms. Checks
  // nonnegativity and that sum + tail_mass is within tolerance of 1.
  static MassFunction from_parts(Labels labels, std::vector<double> probabilities,
                                 double tail_mass, double tolerance,
                                 std::shared_ptr<const TailCertificate> certificate = nullptr,
                                 TailMode mode = TailMode::NewAtoms);

  std::size_t size() const noexcept { return p_.size(); }
  std::span<const double> probabilities() const noexcept { return p_; }
  const Labels& labels() const noexcept { return labels_; }
  double tail_mass() const noexcept { return tail_mass_; }
  double tolerance() const noexcept { return tolerance_; }
  // Number of atoms with p > 0.
  std::size_t support_size() const noexcept { return support_; }
  bool is_exact() const noexcept { return tail_mass_ == 0.0 && certificate_ == nullptr; }
  const TailCertificate* certificate() const noexcept { return certificate_.get(); }
  const std::shared_ptr<const TailCertificate>& certificate_ptr() const noexcept {
    return certificate_;
  }
  TailMode tail_mode() const noexcept { return mode_; }

 private:
  Labels labels_;
  std::vector<double> p_;
  double tail_mass_ = 0.0;
  double tolerance_ = kDefaultTolerance;
  std::size_t support_ = 0;
  std::shared_ptr<const TailCertificate> certificate_;
  TailMode mode_ = TailMode::NewAtoms;
};

class EntropyValue {
 public:
  static EntropyValue finite(double value, double error_bound = 0.0);
  static EntropyValue diverges() { return EntropyValue(); }

  bool is_finite() const noexcept { return finite_; }
  // Throws NumericViolation when the entropy diverges.
  double value() const;
  double error_bound() const;

 private:
  EntropyValue() = default;
  bool finite_ = false;
  double value_ = 0.0;
  double error_bound_ = 0.0;
};

struct Cell {
  std::int64_t row = 0;
  std::int64_t col = 0;
  double p = 0.0;
};

// Where the unrepresented cells of a certified infinite joint sit.
enum class TailLayout {
  Diagonal,  // cell (k, k) for every family index k beyond the truncation
  OddEven,   // cell (1, k) for odd k, (2, k) for even k
};

class JointMass {
 public:
  static JointMass from_entries(std::vector<Cell> entries, double tolerance = kDefaultTolerance);

  // Certified truncation of an infinite joint. Cells must be positive and
  // unique; tail_mass bounds the unrepresented cells described by the
  // certificate and layout.
  static JointMass from_parts(std::vector<Cell> cells, double tail_mass, double tolerance,
                              std::shared_ptr<const TailCertificate> certificate,
                              TailLayout layout);

  // Sorted by (row, col); every stored p is > 0.
  std::span<const Cell> cells() const noexcept { return cells_; }
  const MassFunction& rows() const noexcept { return rows_; }
  const MassFunction& cols() const noexcept { return cols_; }
  std::span<const std::int64_t> row_indices() const noexcept { return row_index_; }
  std::span<const std::int64_t> col_indices() const noexcept { return col_index_; }
  double tolerance() const noexcept { return tolerance_; }
  double tail_mass() const noexcept { return tail_mass_; }
  bool is_exact() const noexcept { return tail_mass_ == 0.0 && certificate_ == nullptr; }
  const TailCertificate* certificate() const noexcept { return certificate_.get(); }
  const std::shared_ptr<const TailCertificate>& certificate_ptr() const noexcept {
    return certificate_;
  }
  TailLayout layout() const noexcept { return layout_; }

  std::optional<double> find(std::int64_t row, std::int64_t col) const;
  // The joint as a mass over its cells, labelled "row,col".
  MassFunction flat() const;

 private:
  static JointMass build(std::vector<Cell> cells, double tail_mass, double tolerance,
                         std::shared_ptr<const TailCertificate> certificate, TailLayout layout);

  std::vector<Cell> cells_;
  std::vector<std::int64_t> row_index_;
  std::vector<std::int64_t> col_index_;
  MassFunction rows_;
  MassFunction cols_;
  double tolerance_ = kDefaultTolerance;
  double tail_mass_ = 0.0;
  std::shared_ptr<const TailCertificate> certificate_;
  TailLayout layout_ = TailLayout::Diagonal;
};

MassFunction validate_mass(std::vector<Atom> atoms, double tolerance = kDefaultTolerance);
JointMass joint_from_entries(std::vector<Cell> entries, double tolerance = kDefaultTolerance);

// Independent joint px[i] * py[j]; rows and cols are numbered 1.. in atom order.
JointMass product_joint(const MassFunction& px, const MassFunction& py);

// Every positive row has exactly one stored cell and every positive column
// has exactly one stored cell.
bool is_one_to_one(const JointMass& joint);

// max |p_ij - p_i. p_.j| over the full row x column grid of the supports.
double factorization_residual(const JointMass& joint);

EntropyValue shannon_entropy(const MassFunction& mass);

// KL form sum p_ij ln(p_ij / (p_i. p_.j)); requires an exact joint.
EntropyValue shannon_mi(const JointMass& joint);

}  // namespace gmi
