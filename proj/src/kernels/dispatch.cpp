#include <cstdlib>
#include <string_view>

#include "tables.hpp"

namespace lofi::kernels {

namespace {

[[maybe_unused]] bool cpu_has_avx2() noexcept {
#if defined(LOFI_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& resolve() noexcept {
  if (const char* forced = std::getenv("LOFI_SIMD"); forced && std::string_view(forced) == "scalar")
    return scalar_table();
  const auto tables = available_tables();
  return *tables.back();
}

}  // namespace

std::vector<const KernelTable*> available_tables() {
  std::vector<const KernelTable*> out{&scalar_table()};
#if defined(LOFI_HAVE_AVX2_KERNELS)
  if (cpu_has_avx2()) out.push_back(&detail::avx2_table());
#endif
#if defined(LOFI_HAVE_NEON_KERNELS)
  out.push_back(&detail::neon_table());
#endif
  return out;
}

const KernelTable& active() noexcept {
  static const KernelTable& table = resolve();
  return table;
}

}  // namespace lofi::kernels
