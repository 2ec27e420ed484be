#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "iidgan/kernels.hpp"
#include "iidgan/rng.hpp"

using namespace iidgan;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
  return v;
}

void naive_gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                const double* b, std::size_t ldb, long double* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      long double s = 0;
      for (std::size_t p = 0; p < k; ++p) s += (long double)a[i * lda + p] * b[p * ldb + j];
      c[i * ldc + j] += s;
    }
}

}  // namespace

TEST_CASE("scalar gemm on a hand example") {
  const double a[] = {1, 2, 3, 4, 5, 6};        // 2×3
  const double b[] = {7, 8, 9, 10, 11, 12};     // 3×2
  double c[] = {1, 1, 1, 1};
  kernels::scalar_table().gemm_acc(2, 2, 3, a, 3, b, 2, c, 2);
  CHECK(c[0] == 59);
  CHECK(c[1] == 65);
  CHECK(c[2] == 140);
  CHECK(c[3] == 155);
}

TEST_CASE("gemm tables agree with an extended-precision reference") {
  Rng rng(11);
  std::vector<const kernels::KernelTable*> tables{&kernels::scalar_table()};
  if (kernels::avx2_table()) tables.push_back(kernels::avx2_table());
  const std::size_t shapes[][3] = {{1, 1, 1},   {3, 5, 7},    {6, 8, 4},   {7, 9, 13},
                                   {13, 17, 3}, {12, 4, 1},   {5, 3, 200}, {37, 101, 29},
                                   {256, 100, 200}, {64, 2, 100}, {2, 64, 100}};
  for (auto* t : tables) {
    for (const auto& s : shapes) {
      const std::size_t m = s[0], n = s[1], k = s[2];
      // Padded leading dimensions exercise the stride arguments.
      const std::size_t lda = k + 3, ldb = n + 1, ldc = n + 2;
      const auto a = random_vec(m * lda, rng);
      const auto b = random_vec(k * ldb, rng);
      auto c = random_vec(m * ldc, rng);
      std::vector<long double> ref(c.begin(), c.end());
      t->gemm_acc(m, n, k, a.data(), lda, b.data(), ldb, c.data(), ldc);
      naive_gemm(m, n, k, a.data(), lda, b.data(), ldb, ref.data(), ldc);
      double worst = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < ldc; ++j) {
          const double diff = std::abs(c[i * ldc + j] - (double)ref[i * ldc + j]);
          if (j >= n) CHECK(diff == 0.0);   // padding untouched
          worst = std::max(worst, diff);
        }
      INFO(t->name, " ", m, "x", n, "x", k);
      CHECK(worst <= 4e-16 * static_cast<double>(k + 1));
    }
  }
}

TEST_CASE("avx2 column sums and adam match scalar bit for bit") {
  const auto* avx = kernels::avx2_table();
  if (!avx) return;
  const auto& sc = kernels::scalar_table();
  Rng rng(5);
  for (std::size_t cols : {1u, 3u, 4u, 7u, 100u, 203u}) {
    const std::size_t rows = 19, lda = cols + 2;
    const auto a = random_vec(rows * lda, rng);
    std::vector<double> o1(cols, 0.5), o2(cols, 0.5);
    sc.col_sum_acc(rows, cols, a.data(), lda, o1.data());
    avx->col_sum_acc(rows, cols, a.data(), lda, o2.data());
    CHECK(o1 == o2);
  }
  for (std::size_t n : {1u, 5u, 8u, 1001u}) {
    auto p1 = random_vec(n, rng), g1 = random_vec(n, rng), m1 = random_vec(n, rng);
    auto v1 = random_vec(n, rng);
    for (auto& x : v1) x = std::abs(x);
    auto p2 = p1, g2 = g1, m2 = m1, v2 = v1;
    const kernels::AdamCoeffs c{0.5, 0.999, 2e-4 / (1 - 0.5 * 0.5), 1 / (1 - 0.999 * 0.999), 1e-8};
    sc.adam_update(n, p1.data(), g1.data(), m1.data(), v1.data(), c);
    avx->adam_update(n, p2.data(), g2.data(), m2.data(), v2.data(), c);
    CHECK(p1 == p2);
    CHECK(m1 == m2);
    CHECK(v1 == v2);
    CHECK(g1 == std::vector<double>(n, 0.0));
    CHECK(g2 == std::vector<double>(n, 0.0));
  }
}

TEST_CASE("table selection") {
  CHECK(kernels::select("scalar"));
  CHECK(std::string(kernels::active().name) == "scalar");
  CHECK_FALSE(kernels::select("neon"));
  CHECK(std::string(kernels::active().name) == "scalar");
  CHECK(kernels::select("auto"));
  if (kernels::avx2_table()) CHECK(&kernels::active() == kernels::avx2_table());
}
