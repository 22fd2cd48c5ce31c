#include <immintrin.h>

#include <limits>

#include "tables.hpp"

namespace lofi::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double max_avx2(const double* x, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  if (n >= 4) {
    __m256d vm = _mm256_loadu_pd(x);
    for (i = 4; i + 4 <= n; i += 4) vm = _mm256_max_pd(vm, _mm256_loadu_pd(x + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, vm);
    for (double v : lanes)
      if (v > m) m = v;
  }
  for (; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

void scale_avx2(const double* x, double s, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vs));
  for (; i < n; ++i) out[i] = x[i] * s;
}

void max_dot_avx2(const double* rows, std::size_t n_rows, const double* cols, std::size_t n_cols,
                  std::size_t dim, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n_cols; ++c) {
      const double d = dot_avx2(rows + r * dim, cols + c * dim, dim);
      if (d > best) best = d;
    }
    out[r] = best;
  }
}

}  // namespace

const KernelTable& avx2_table() noexcept {
  static const KernelTable table{"avx2", dot_avx2, sum_avx2, max_avx2, scale_avx2, max_dot_avx2};
  return table;
}

}  // namespace lofi::kernels::detail
