#pragma once

#include <cmath>

namespace gmi::kernels::detail {

// Neumaier's variant of Kahan summation.
struct Compensated {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) noexcept {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }

  double value() const noexcept { return sum + carry; }
};

}  // namespace gmi::kernels::detail
