// AVX2+FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the dispatcher has checked CPUID.

#include <immintrin.h>

#include <array>
#include <cfloat>
#include <cmath>

#include "compensated.hpp"
#include "gmi/kernels.hpp"

namespace gmi::kernels {
namespace {

using detail::Compensated;

constexpr std::size_t kLanes = 4;

inline __m256d splat(double v) { return _mm256_set1_pd(v); }

// 2^k for integral k in [-1022, 1023] held as doubles.
inline __m256d pow2_int(__m256d k) {
  const __m256d magic = splat(6755399441055744.0);  // 1.5 * 2^52
  const __m256i as_int =
      _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, magic)), _mm256_castpd_si256(magic));
  const __m256i biased = _mm256_add_epi64(as_int, _mm256_set1_epi64x(1023));
  return _mm256_castsi256_pd(_mm256_slli_epi64(biased, 52));
}

// exp with |error| of about 1 ulp: x = k ln2 + r, |r| <= ln2/2, degree-13
// Taylor polynomial on r, then scaling split in two factors so that the
// subnormal range is reached with a single rounding.
inline __m256d exp4(__m256d x) {
  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, splat(1.4426950408889634074)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, splat(6.93147180369123816490e-01), x);
  r = _mm256_fnmadd_pd(k, splat(1.90821492927058770002e-10), r);

  __m256d p = splat(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, splat(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, splat(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, splat(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, splat(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, splat(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, splat(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, splat(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, splat(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, splat(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, splat(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, splat(0.5));
  p = _mm256_fmadd_pd(p, r, splat(1.0));
  p = _mm256_fmadd_pd(p, r, splat(1.0));

  const __m256d ka = _mm256_floor_pd(_mm256_mul_pd(k, splat(0.5)));
  const __m256d kb = _mm256_sub_pd(k, ka);
  __m256d result = _mm256_mul_pd(_mm256_mul_pd(p, pow2_int(ka)), pow2_int(kb));

  const __m256d under = _mm256_cmp_pd(x, splat(-745.1332191019412), _CMP_LT_OQ);
  const __m256d over = _mm256_cmp_pd(x, splat(709.782712893384), _CMP_GT_OQ);
  result = _mm256_blendv_pd(result, _mm256_setzero_pd(), under);
  result = _mm256_blendv_pd(result, splat(HUGE_VAL), over);
  return result;
}

// Natural log, fdlibm reduction: x = 2^e m with m in [sqrt(2)/2, sqrt(2)),
// f = m - 1, s = f / (2 + f), log(1 + f) = f - hfsq + s (hfsq + R(s^2)).
inline __m256d log4(__m256d x) {
  const __m256d tiny = _mm256_cmp_pd(x, splat(DBL_MIN), _CMP_LT_OQ);
  const __m256d scaled = _mm256_blendv_pd(x, _mm256_mul_pd(x, splat(18014398509481984.0)), tiny);
  const __m256d e_adjust = _mm256_blendv_pd(_mm256_setzero_pd(), splat(-54.0), tiny);

  const __m256i bits = _mm256_castpd_si256(scaled);
  const __m256i biased_exp = _mm256_srli_epi64(bits, 52);
  const __m256i mant_bits =
      _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                      _mm256_set1_epi64x(0x3FF0000000000000LL));
  __m256d m = _mm256_castsi256_pd(mant_bits);

  const __m256d magic = splat(6755399441055744.0);
  const __m256i e_int = _mm256_sub_epi64(biased_exp, _mm256_set1_epi64x(1023));
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_add_epi64(e_int, _mm256_castpd_si256(magic))), magic);
  e = _mm256_add_pd(e, e_adjust);

  const __m256d big = _mm256_cmp_pd(m, splat(1.4142135623730951), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, splat(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, splat(1.0)));

  const __m256d f = _mm256_sub_pd(m, splat(1.0));
  const __m256d s = _mm256_div_pd(f, _mm256_add_pd(splat(2.0), f));
  const __m256d z = _mm256_mul_pd(s, s);
  __m256d poly = splat(1.479819860511658591e-01);
  poly = _mm256_fmadd_pd(poly, z, splat(1.531383769920937332e-01));
  poly = _mm256_fmadd_pd(poly, z, splat(1.818357216161805012e-01));
  poly = _mm256_fmadd_pd(poly, z, splat(2.222219843214978396e-01));
  poly = _mm256_fmadd_pd(poly, z, splat(2.857142874366239149e-01));
  poly = _mm256_fmadd_pd(poly, z, splat(3.999999999940941908e-01));
  poly = _mm256_fmadd_pd(poly, z, splat(6.666666666666735130e-01));
  const __m256d big_r = _mm256_mul_pd(poly, z);
  const __m256d hfsq = _mm256_mul_pd(_mm256_mul_pd(splat(0.5), f), f);

  const __m256d inner =
      _mm256_fmadd_pd(s, _mm256_add_pd(hfsq, big_r), _mm256_mul_pd(e, splat(1.90821492927058770002e-10)));
  __m256d result = _mm256_fmsub_pd(e, splat(6.93147180369123816490e-01),
                                   _mm256_sub_pd(_mm256_sub_pd(hfsq, inner), f));

  const __m256d zero = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_EQ_OQ);
  const __m256d negative_or_nan = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_NGE_UQ);
  const __m256d infinite = _mm256_cmp_pd(x, splat(HUGE_VAL), _CMP_EQ_OQ);
  result = _mm256_blendv_pd(result, splat(-HUGE_VAL), zero);
  result = _mm256_blendv_pd(result, splat(std::nan("")), negative_or_nan);
  result = _mm256_blendv_pd(result, splat(HUGE_VAL), infinite);
  return result;
}

struct LaneSum {
  __m256d sum = _mm256_setzero_pd();
  __m256d carry = _mm256_setzero_pd();

  void add(__m256d x) {
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFLL));
    const __m256d t = _mm256_add_pd(sum, x);
    const __m256d keep = _mm256_cmp_pd(_mm256_and_pd(sum, abs_mask), _mm256_and_pd(x, abs_mask),
                                       _CMP_GE_OQ);
    const __m256d a = _mm256_add_pd(_mm256_sub_pd(sum, t), x);
    const __m256d b = _mm256_add_pd(_mm256_sub_pd(x, t), sum);
    carry = _mm256_add_pd(carry, _mm256_blendv_pd(b, a, keep));
    sum = t;
  }

  double reduce() const {
    alignas(32) std::array<double, kLanes> s{};
    alignas(32) std::array<double, kLanes> c{};
    _mm256_store_pd(s.data(), sum);
    _mm256_store_pd(c.data(), carry);
    Compensated out;
    for (double v : s) out.add(v);
    for (double v : c) out.add(v);
    return out.value();
  }
};

// Loads the last partial block, padding unused lanes with `fill`; `valid`
// receives an all-ones mask on the loaded lanes.
inline __m256d load_tail(const double* p, std::size_t count, double fill, __m256d& valid) {
  alignas(32) std::array<double, kLanes> buf{fill, fill, fill, fill};
  for (std::size_t i = 0; i < count; ++i) buf[i] = p[i];
  const __m256i lane = _mm256_set_epi64x(3, 2, 1, 0);
  valid = _mm256_castsi256_pd(
      _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<long long>(count)), lane));
  return _mm256_load_pd(buf.data());
}

inline void store_tail(double* p, std::size_t count, __m256d v) {
  alignas(32) std::array<double, kLanes> buf{};
  _mm256_store_pd(buf.data(), v);
  for (std::size_t i = 0; i < count; ++i) p[i] = buf[i];
}

double max_value(std::span<const double> x) {
  __m256d m = splat(-HUGE_VAL);
  std::size_t i = 0;
  for (; i + kLanes <= x.size(); i += kLanes) m = _mm256_max_pd(m, _mm256_loadu_pd(x.data() + i));
  alignas(32) std::array<double, kLanes> lanes{};
  _mm256_store_pd(lanes.data(), m);
  double out = -HUGE_VAL;
  for (double v : lanes) out = v > out ? v : out;
  for (; i < x.size(); ++i) out = x[i] > out ? x[i] : out;
  return out;
}

double sum(std::span<const double> x) {
  LaneSum acc;
  std::size_t i = 0;
  for (; i + kLanes <= x.size(); i += kLanes) acc.add(_mm256_loadu_pd(x.data() + i));
  if (i < x.size()) {
    __m256d valid;
    const __m256d v = load_tail(x.data() + i, x.size() - i, 0.0, valid);
    acc.add(_mm256_and_pd(v, valid));
  }
  return acc.reduce();
}

void log_values(std::span<const double> in, std::span<double> out) {
  std::size_t i = 0;
  for (; i + kLanes <= in.size(); i += kLanes) {
    _mm256_storeu_pd(out.data() + i, log4(_mm256_loadu_pd(in.data() + i)));
  }
  if (i < in.size()) {
    __m256d valid;
    const __m256d v = load_tail(in.data() + i, in.size() - i, 1.0, valid);
    store_tail(out.data() + i, in.size() - i, log4(v));
  }
}

double exp_affine(std::span<const double> x, double scale, double shift, std::span<double> out) {
  const __m256d vscale = splat(scale);
  const __m256d vshift = splat(shift);
  LaneSum acc;
  std::size_t i = 0;
  for (; i + kLanes <= x.size(); i += kLanes) {
    const __m256d y = _mm256_sub_pd(_mm256_mul_pd(vscale, _mm256_loadu_pd(x.data() + i)), vshift);
    const __m256d w = exp4(y);
    _mm256_storeu_pd(out.data() + i, w);
    acc.add(w);
  }
  if (i < x.size()) {
    __m256d valid;
    const __m256d v = load_tail(x.data() + i, x.size() - i, 0.0, valid);
    const __m256d w = _mm256_and_pd(exp4(_mm256_sub_pd(_mm256_mul_pd(vscale, v), vshift)), valid);
    store_tail(out.data() + i, x.size() - i, w);
    acc.add(w);
  }
  return acc.reduce();
}

ExpMoments exp_moments(std::span<const double> x, double scale, double shift) {
  const __m256d vscale = splat(scale);
  const __m256d vshift = splat(shift);
  LaneSum s0;
  LaneSum s1;
  auto step = [&](__m256d v, __m256d valid) {
    const __m256d y = _mm256_sub_pd(_mm256_mul_pd(vscale, v), vshift);
    const __m256d w = exp4(y);
    const __m256d live = _mm256_and_pd(valid, _mm256_cmp_pd(w, _mm256_setzero_pd(), _CMP_GT_OQ));
    s0.add(_mm256_and_pd(w, valid));
    // -y * w, computed as a product of two rounded values like the scalar path
    s1.add(_mm256_and_pd(_mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), y), w), live));
  };
  const __m256d all = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
  std::size_t i = 0;
  for (; i + kLanes <= x.size(); i += kLanes) step(_mm256_loadu_pd(x.data() + i), all);
  if (i < x.size()) {
    __m256d valid;
    const __m256d v = load_tail(x.data() + i, x.size() - i, 0.0, valid);
    step(v, valid);
  }
  return {s0.reduce(), s1.reduce()};
}

double neg_xlogx_sum(std::span<const double> p) {
  LaneSum acc;
  auto step = [&](__m256d v, __m256d valid) {
    const __m256d live = _mm256_and_pd(valid, _mm256_cmp_pd(v, _mm256_setzero_pd(), _CMP_GT_OQ));
    const __m256d term = _mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), v), log4(v));
    acc.add(_mm256_and_pd(term, live));
  };
  const __m256d all = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
  std::size_t i = 0;
  for (; i + kLanes <= p.size(); i += kLanes) step(_mm256_loadu_pd(p.data() + i), all);
  if (i < p.size()) {
    __m256d valid;
    const __m256d v = load_tail(p.data() + i, p.size() - i, 1.0, valid);
    step(v, valid);
  }
  return acc.reduce();
}

}  // namespace

namespace detail {
const KernelTable& avx2_kernels() noexcept {
  static const KernelTable table{Isa::Avx2, max_value,   sum,          log_values,
                                 exp_affine, exp_moments, neg_xlogx_sum};
  return table;
}
}  // namespace detail

}  // namespace gmi::kernels
