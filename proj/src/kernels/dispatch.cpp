#include <atomic>
#include <cstdlib>
#include <string_view>

#include "gmi/error.hpp"
#include "gmi/kernels.hpp"

namespace gmi::kernels {

#if GMI_HAVE_AVX2
namespace detail {
const KernelTable& avx2_kernels() noexcept;
}
#endif

namespace {

bool cpu_has_avx2() noexcept {
#if GMI_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool scalar_forced_by_env() noexcept {
  const char* v = std::getenv("GMI_FORCE_SCALAR");
  return v != nullptr && std::string_view(v) != "" && std::string_view(v) != "0";
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{[] {
    const KernelTable* simd = avx2_table();
    return (simd != nullptr && !scalar_forced_by_env()) ? simd : &scalar_table();
  }()};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable* avx2_table() noexcept {
#if GMI_HAVE_AVX2
  static const bool supported = cpu_has_avx2();
  return supported ? &detail::avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

Isa detected_isa() noexcept { return avx2_table() != nullptr ? Isa::Avx2 : Isa::Scalar; }

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

void force_isa(Isa isa) {
  const KernelTable* table = isa == Isa::Avx2 ? avx2_table() : &scalar_table();
  if (table == nullptr) {
    throw Error(ErrorCode::BadParameter, "AVX2 kernels are not available on this CPU/build");
  }
  current().store(table, std::memory_order_release);
}

}  // namespace gmi::kernels
