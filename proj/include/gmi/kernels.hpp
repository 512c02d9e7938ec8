#pragma once
// Data-parallel inner loops shared by the distribution code.
//
// Every kernel has a scalar reference implementation (std::log / std::exp,
// ascending Neumaier summation) and, on x86-64, an AVX2+FMA variant with
// polynomial log/exp and lane-strided Neumaier summation. The variant is
// chosen once at startup from CPUID; GMI_FORCE_SCALAR=1 or force_isa()
// pins the scalar table. Both tables are deterministic for a given input.

#include <cstddef>
#include <span>
#include <string_view>

namespace gmi::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

struct ExpMoments {
  double sum = 0.0;        // sum of e^{y_i}
  double neg_ylogy = 0.0;  // sum of -y_i e^{y_i}, i.e. sum of w ln(1/w)
};

struct KernelTable {
  Isa isa;
  double (*max_value)(std::span<const double> x);
  double (*sum)(std::span<const double> x);
  // out[i] = ln(in[i]); in and out may alias.
  void (*log_values)(std::span<const double> in, std::span<double> out);
  // out[i] = exp(scale * x[i] - shift); returns the compensated sum of out.
  double (*exp_affine)(std::span<const double> x, double scale, double shift,
                       std::span<double> out);
  // With y_i = scale * x[i] - shift, returns sums of e^{y_i} and -y_i e^{y_i}.
  ExpMoments (*exp_moments)(std::span<const double> x, double scale, double shift);
  // sum of -p ln p over p > 0; zeros contribute nothing.
  double (*neg_xlogx_sum)(std::span<const double> p);
};

const KernelTable& scalar_table() noexcept;
// nullptr when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table() noexcept;

Isa detected_isa() noexcept;
const KernelTable& active() noexcept;
void force_isa(Isa isa);

}  // namespace gmi::kernels
