#pragma once

// Data-parallel inner loops shared by cosine scoring and span scoring.
//
// Every kernel has a scalar reference implementation. AVX2 (x86-64) or NEON
// (aarch64) variants are compiled in when available and picked at runtime.
// Set LOFI_SIMD=scalar in the environment to force the reference path.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace lofi::kernels {

struct KernelTable {
  std::string_view name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*max)(const double* x, std::size_t n);  // n >= 1
  // out[i] = x[i] * s. Plain multiply (no FMA), so results are bit-identical across variants.
  void (*scale)(const double* x, double s, double* out, std::size_t n);
  // out[r] = max_c dot(rows[r], cols[c]) for row-major rows (n_rows x dim) and cols (n_cols x dim).
  void (*max_dot)(const double* rows, std::size_t n_rows, const double* cols, std::size_t n_cols,
                  std::size_t dim, double* out);
};

const KernelTable& scalar_table() noexcept;

// Every variant compiled in and supported by this CPU, scalar first.
std::vector<const KernelTable*> available_tables();

// The table used by the library. Resolved once; honours LOFI_SIMD.
const KernelTable& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  return active().dot(a.data(), b.data(), a.size());
}

inline double sum(std::span<const double> x) noexcept { return active().sum(x.data(), x.size()); }

inline double max(std::span<const double> x) noexcept { return active().max(x.data(), x.size()); }

inline void scale(std::span<const double> x, double s, std::span<double> out) noexcept {
  active().scale(x.data(), s, out.data(), x.size());
}

}  // namespace lofi::kernels
