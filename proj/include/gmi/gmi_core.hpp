#pragma once
// Order-n collision transforms and the generalized measures built on them.
//
// The order-n transform of p puts mass p_k^n / sum_i p_i^n on letter k: the
// law of the common letter of n iid draws given that all n coincide. Its
// Shannon entropy H_n is finite for every p once n >= 2, which gives
//   MI_n    = H_n(X) + H_n(Y) - H_n(X,Y)   (marginals of the joint transform)
//   kappa_n = MI_n / H_n(X,Y)
// with MI_n = 0 iff independence and kappa_n = 1 iff one-to-one.

#include <cstdint>
#include <optional>
#include <vector>

#include "gmi/dist_core.hpp"

namespace gmi {

class Order {
 public:
  explicit Order(int n);
  int value() const noexcept { return n_; }

 private:
  int n_;
};

// Escort of order n, computed in log domain with a max shift.
MassFunction cdotc(const MassFunction& mass, Order n);
// p_k = q_k^{1/n} / sum_i q_i^{1/n}; requires an exact input.
MassFunction cdotc_inverse(const MassFunction& mass, Order n);
// p_{n,i,j} = p_ij^n / sum_st p_st^n with marginals recomputed from the cells.
JointMass cdotc_joint(const JointMass& joint, Order n);

struct OrderEntropy {
  EntropyValue entropy;
  // Upper bound (n/e) eta_{n-1}/eta_n + ln eta_n, maximized over the
  // uncertainty left by a truncation certificate.
  double upper_bound = 0.0;
};

OrderEntropy h_n(const MassFunction& mass, Order n);
OrderEntropy h_n(const JointMass& joint, Order n);

struct MiValue {
  double value = 0.0;         // KL form on the order-n joint, tiny negatives clamped
  double entropy_form = 0.0;  // H_n(X) + H_n(Y) - H_n(X,Y)
  double error_bound = 0.0;   // propagated from truncation certificates
  EntropyValue h_x = EntropyValue::finite(0.0);
  EntropyValue h_y = EntropyValue::finite(0.0);
  EntropyValue h_xy = EntropyValue::finite(0.0);
};

MiValue mi_n(const JointMass& joint, Order n);

// Empty when H_n(X,Y) = 0 (single-cell joint).
std::optional<double> kappa_n(const JointMass& joint, Order n);
std::optional<double> kappa_from(const MiValue& mi);

struct ProfileRow {
  int n = 1;
  MiValue mi;
  std::optional<double> kappa;
};

struct GmiProfile {
  std::vector<ProfileRow> rows;
};

// Rows for n_min..n_max; with workers > 1 rows are computed concurrently and
// the result is identical to the sequential one.
GmiProfile gmi_profile(const JointMass& joint, int n_min, int n_max, unsigned workers = 1);

}  // namespace gmi
