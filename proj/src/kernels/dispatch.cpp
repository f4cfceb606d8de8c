#include <atomic>
#include <cstdlib>
#include <string>

#include "emrelax/kernels/kernels.hpp"

namespace emrelax::kernels {

#if defined(EMRELAX_BUILD_AVX2)
const KernelTable& avx2_kernels();
#endif

const KernelTable* avx2_table() {
#if defined(EMRELAX_BUILD_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* from_name(std::string_view name) {
  if (name == "scalar") return &scalar_table();
  if (name == "avx2") return avx2_table();
  if (name == "auto" || name.empty()) {
    const KernelTable* fast = avx2_table();
    return fast ? fast : &scalar_table();
  }
  return nullptr;
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current = [] {
    const char* env = std::getenv("EMRELAX_SIMD");
    const KernelTable* t = from_name(env ? std::string_view(env) : std::string_view("auto"));
    return t ? t : &scalar_table();
  }();
  return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  const KernelTable* t = from_name(name);
  if (!t) return false;
  slot().store(t, std::memory_order_release);
  return true;
}

}  // namespace emrelax::kernels
