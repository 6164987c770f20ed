#include <cstdlib>
#include <string_view>

#include "kernels_internal.hpp"

namespace pif::kernels {

#ifndef PIF_BUILD_AVX2
namespace detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace detail
#endif

const KernelTable* avx2() {
#if defined(PIF_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable* chosen = [] {
    const char* force = std::getenv("PIF_FORCE_SCALAR");
    const bool forced = force && *force && std::string_view(force) != "0";
    const KernelTable* simd = forced ? nullptr : avx2();
    return simd ? simd : &scalar();
  }();
  return *chosen;
}

}  // namespace pif::kernels
