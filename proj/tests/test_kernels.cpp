#include <cmath>
#include <random>

#include "doctest.h"
#include "lofi/kernels.hpp"

using namespace lofi;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 3.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("every kernel table agrees with the scalar reference") {
  const auto& ref = kernels::scalar_table();
  const auto tables = kernels::available_tables();
  REQUIRE(!tables.empty());
  CHECK(tables.front() == &ref);
  std::mt19937_64 rng(11);

  for (const auto* t : tables) {
    CAPTURE(t->name);
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 100u, 1024u, 1031u}) {
      CAPTURE(n);
      const auto a = random_vector(rng, n);
      const auto b = random_vector(rng, n);
      const double tol = 1e-12 * static_cast<double>(n) * 10.0;
      CHECK(std::abs(t->dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= tol * 10);
      CHECK(std::abs(t->sum(a.data(), n) - ref.sum(a.data(), n)) <= tol * 10);
      CHECK(t->max(a.data(), n) == ref.max(a.data(), n));

      std::vector<double> o1(n), o2(n);
      t->scale(a.data(), 0.37, o1.data(), n);
      ref.scale(a.data(), 0.37, o2.data(), n);
      CHECK(o1 == o2);
    }
  }
}

TEST_CASE("max_dot matches a brute-force reference") {
  std::mt19937_64 rng(5);
  for (const auto* t : kernels::available_tables()) {
    CAPTURE(t->name);
    for (std::size_t dim : {1u, 3u, 8u, 13u, 64u}) {
      const std::size_t rows = 7, cols = 3;
      const auto r = random_vector(rng, rows * dim);
      const auto c = random_vector(rng, cols * dim);
      std::vector<double> out(rows);
      t->max_dot(r.data(), rows, c.data(), cols, dim, out.data());
      for (std::size_t i = 0; i < rows; ++i) {
        double best = -INFINITY;
        for (std::size_t k = 0; k < cols; ++k) {
          double s = 0.0;
          for (std::size_t d = 0; d < dim; ++d) s += r[i * dim + d] * c[k * dim + d];
          best = std::max(best, s);
        }
        CHECK(out[i] == doctest::Approx(best).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("the active table honours LOFI_SIMD") {
  const char* env = std::getenv("LOFI_SIMD");
  if (env && std::string_view(env) == "scalar") CHECK(kernels::active().name == "scalar");
  else CHECK(kernels::active().name == kernels::available_tables().back()->name);
}
