// Compiled with -mavx2 -mfma. Only reached after a runtime CPU check.
#include <immintrin.h>

#include <type_traits>

#include "iidgan/kernels.hpp"

namespace iidgan::kernels {
namespace {

// R rows × 8 columns of C, accumulated over the full k extent.
template <int R>
inline void block_rx8(std::size_t k, const double* a, std::size_t lda, const double* b,
                      std::size_t ldb, double* c, std::size_t ldc) {
  __m256d lo[R];
  __m256d hi[R];
#pragma GCC unroll 6
  for (int r = 0; r < R; ++r) {
    lo[r] = _mm256_loadu_pd(c + r * ldc);
    hi[r] = _mm256_loadu_pd(c + r * ldc + 4);
  }
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d b0 = _mm256_loadu_pd(b + p * ldb);
    const __m256d b1 = _mm256_loadu_pd(b + p * ldb + 4);
#pragma GCC unroll 6
    for (int r = 0; r < R; ++r) {
      const __m256d ar = _mm256_broadcast_sd(a + r * lda + p);
      lo[r] = _mm256_fmadd_pd(ar, b0, lo[r]);
      hi[r] = _mm256_fmadd_pd(ar, b1, hi[r]);
    }
  }
#pragma GCC unroll 6
  for (int r = 0; r < R; ++r) {
    _mm256_storeu_pd(c + r * ldc, lo[r]);
    _mm256_storeu_pd(c + r * ldc + 4, hi[r]);
  }
}

template <int R>
inline void block_rx4(std::size_t k, const double* a, std::size_t lda, const double* b,
                      std::size_t ldb, double* c, std::size_t ldc) {
  __m256d acc[R];
#pragma GCC unroll 6
  for (int r = 0; r < R; ++r) acc[r] = _mm256_loadu_pd(c + r * ldc);
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d b0 = _mm256_loadu_pd(b + p * ldb);
#pragma GCC unroll 6
    for (int r = 0; r < R; ++r)
      acc[r] = _mm256_fmadd_pd(_mm256_broadcast_sd(a + r * lda + p), b0, acc[r]);
  }
#pragma GCC unroll 6
  for (int r = 0; r < R; ++r) _mm256_storeu_pd(c + r * ldc, acc[r]);
}


template <int W>
void rows_panel(std::size_t m, std::size_t k, const double* a, std::size_t lda,
                const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  auto run = [&](auto rows_tag, std::size_t i) {
    constexpr int R = decltype(rows_tag)::value;
    if constexpr (W == 8) {
      block_rx8<R>(k, a + i * lda, lda, b, ldb, c + i * ldc, ldc);
    } else {
      block_rx4<R>(k, a + i * lda, lda, b, ldb, c + i * ldc, ldc);
    }
  };
  std::size_t i = 0;
  for (; i + 6 <= m; i += 6) run(std::integral_constant<int, 6>{}, i);
  switch (m - i) {
    case 5: run(std::integral_constant<int, 5>{}, i); break;
    case 4: run(std::integral_constant<int, 4>{}, i); break;
    case 3: run(std::integral_constant<int, 3>{}, i); break;
    case 2: run(std::integral_constant<int, 2>{}, i); break;
    case 1: run(std::integral_constant<int, 1>{}, i); break;
    default: break;
  }
}

void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
              const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) rows_panel<8>(m, k, a, lda, b + j, ldb, c + j, ldc);
  for (; j + 4 <= n; j += 4) rows_panel<4>(m, k, a, lda, b + j, ldb, c + j, ldc);
  if (j == n) return;
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * ldc;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * lda + p];
      const double* bp = b + p * ldb;
      for (std::size_t jj = j; jj < n; ++jj) ci[jj] = __builtin_fma(aip, bp[jj], ci[jj]);
    }
  }
}

void col_sum_acc(std::size_t rows, std::size_t cols, const double* a, std::size_t lda,
                 double* out) {
  std::size_t j = 0;
  for (; j + 4 <= cols; j += 4) {
    __m256d acc = _mm256_loadu_pd(out + j);
    for (std::size_t i = 0; i < rows; ++i) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i * lda + j));
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) out[j] += a[i * lda + j];
}

// Same operation order as the scalar table, so results are bit-identical.
void adam_update(std::size_t n, double* param, double* grad, double* m, double* v,
                 const AdamCoeffs& c) {
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d omb1 = _mm256_set1_pd(1.0 - c.beta1);
  const __m256d omb2 = _mm256_set1_pd(1.0 - c.beta2);
  const __m256d step = _mm256_set1_pd(c.step_size);
  const __m256d bc2 = _mm256_set1_pd(c.inv_bias_corr2);
  const __m256d eps = _mm256_set1_pd(c.epsilon);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, g));
    __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                               _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vi, bc2)), eps);
    const __m256d delta = _mm256_div_pd(_mm256_mul_pd(step, mi), denom);
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), delta));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    _mm256_storeu_pd(grad + i, zero);
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * (g * g);
    param[i] -= c.step_size * m[i] / (__builtin_sqrt(v[i] * c.inv_bias_corr2) + c.epsilon);
    grad[i] = 0.0;
  }
}

constexpr KernelTable kTable{"avx2", &gemm_acc, &col_sum_acc, &adam_update};

}  // namespace

const KernelTable* avx2_table_compiled() { return &kTable; }

}  // namespace iidgan::kernels
