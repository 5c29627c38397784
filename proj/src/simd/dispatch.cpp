#include <cstdlib>
#include <string>

#include "psm/simd/kernels.hpp"

namespace psm::simd {

#if defined(PSM_HAVE_AVX2_TU)
namespace avx2 {
const KernelTable& table();
}
#endif

const KernelTable* avx2_kernels() {
#if defined(PSM_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  if (supported) return &avx2::table();
#endif
  return nullptr;
}

const KernelTable& active() {
  static const KernelTable& chosen = [] () -> const KernelTable& {
    const char* env = std::getenv("PSM_SIMD");
    if (env != nullptr && std::string(env) == "scalar") return scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return *t;
    return scalar_kernels();
  }();
  return chosen;
}

std::string_view active_name() { return active().name; }

}  // namespace psm::simd
