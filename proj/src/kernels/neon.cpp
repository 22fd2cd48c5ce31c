#include <arm_neon.h>

#include <limits>

#include "tables.hpp"

namespace lofi::kernels::detail {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_neon(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double max_neon(const double* x, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  if (n >= 2) {
    float64x2_t vm = vld1q_f64(x);
    for (i = 2; i + 2 <= n; i += 2) vm = vmaxq_f64(vm, vld1q_f64(x + i));
    m = vmaxvq_f64(vm);
  }
  for (; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

void scale_neon(const double* x, double s, double* out, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(x + i), vs));
  for (; i < n; ++i) out[i] = x[i] * s;
}

void max_dot_neon(const double* rows, std::size_t n_rows, const double* cols, std::size_t n_cols,
                  std::size_t dim, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n_cols; ++c) {
      const double d = dot_neon(rows + r * dim, cols + c * dim, dim);
      if (d > best) best = d;
    }
    out[r] = best;
  }
}

}  // namespace

const KernelTable& neon_table() noexcept {
  static const KernelTable table{"neon", dot_neon, sum_neon, max_neon, scale_neon, max_dot_neon};
  return table;
}

}  // namespace lofi::kernels::detail
