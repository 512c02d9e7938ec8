#include <algorithm>
#include <cmath>
#include <limits>

#include "compensated.hpp"
#include "gmi/kernels.hpp"

namespace gmi::kernels {
namespace {

using detail::Compensated;

double max_value(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  return m;
}

double sum(std::span<const double> x) {
  Compensated acc;
  for (double v : x) acc.add(v);
  return acc.value();
}

void log_values(std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::log(in[i]);
}

double exp_affine(std::span<const double> x, double scale, double shift,
                  std::span<double> out) {
  Compensated acc;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(scale * x[i] - shift);
    acc.add(out[i]);
  }
  return acc.value();
}

ExpMoments exp_moments(std::span<const double> x, double scale, double shift) {
  Compensated s0;
  Compensated s1;
  for (double v : x) {
    const double y = scale * v - shift;
    const double w = std::exp(y);
    s0.add(w);
    if (w > 0.0) s1.add(-y * w);
  }
  return {s0.value(), s1.value()};
}

double neg_xlogx_sum(std::span<const double> p) {
  Compensated acc;
  for (double v : p) {
    if (v > 0.0) acc.add(-v * std::log(v));
  }
  return acc.value();
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{Isa::Scalar, max_value, sum,         log_values,
                                 exp_affine,  exp_moments, neg_xlogx_sum};
  return table;
}

}  // namespace gmi::kernels
