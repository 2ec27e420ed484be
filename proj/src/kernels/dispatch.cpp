#include <atomic>
#include <cstdlib>
#include <string_view>

#include "iidgan/kernels.hpp"

namespace iidgan::kernels {

#ifdef IIDGAN_HAVE_AVX2_KERNELS
const KernelTable* avx2_table_compiled();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(IIDGAN_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* lookup(std::string_view name) {
  if (name == "scalar") return &scalar_table();
  if (name == "avx2") return avx2_table();
  if (name == "auto" || name.empty()) {
    const KernelTable* t = avx2_table();
    return t ? t : &scalar_table();
  }
  return nullptr;
}

const KernelTable* initial() {
  const char* env = std::getenv("IIDGAN_KERNELS");
  const KernelTable* t = lookup(env ? env : "auto");
  return t ? t : lookup("auto");
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial()};
  return table;
}

}  // namespace

const KernelTable* avx2_table() {
#ifdef IIDGAN_HAVE_AVX2_KERNELS
  static const bool ok = cpu_has_avx2();
  return ok ? avx2_table_compiled() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
  const KernelTable* t = lookup(name);
  if (!t) return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace iidgan::kernels
