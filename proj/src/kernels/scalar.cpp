#include <limits>

#include "lofi/kernels.hpp"

namespace lofi::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double max_scalar(const double* x, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

void scale_scalar(const double* x, double s, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * s;
}

void max_dot_scalar(const double* rows, std::size_t n_rows, const double* cols, std::size_t n_cols,
                    std::size_t dim, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n_cols; ++c) {
      const double d = dot_scalar(rows + r * dim, cols + c * dim, dim);
      if (d > best) best = d;
    }
    out[r] = best;
  }
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{"scalar", dot_scalar, sum_scalar, max_scalar, scale_scalar,
                                 max_dot_scalar};
  return table;
}

}  // namespace lofi::kernels
