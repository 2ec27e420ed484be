#pragma once

#include <cstddef>
#include <string_view>

namespace iidgan::kernels {

/// Per-step constants of a bias-corrected Adam update.
struct AdamCoeffs {
  double beta1;
  double beta2;
  double step_size;        // lr / (1 - beta1^t)
  double inv_bias_corr2;   // 1 / (1 - beta2^t)
  double epsilon;
};

/// Data-parallel inner loops. Every table computes the same functions; they
/// differ only in instruction set and therefore in rounding of the GEMM
/// accumulation order.
struct KernelTable {
  const char* name;

  /// C[m×n] += A[m×k] · B[k×n], row-major with explicit leading dimensions.
  void (*gemm_acc)(std::size_t m, std::size_t n, std::size_t k,
                   const double* a, std::size_t lda,
                   const double* b, std::size_t ldb,
                   double* c, std::size_t ldc);

  /// out[j] += Σ_i a[i·lda + j] for j < cols.
  void (*col_sum_acc)(std::size_t rows, std::size_t cols, const double* a,
                      std::size_t lda, double* out);

  /// In-place Adam update over n parameters; zeroes grad afterwards.
  void (*adam_update)(std::size_t n, double* param, double* grad, double* m,
                      double* v, const AdamCoeffs& c);
};

const KernelTable& scalar_table();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks
/// AVX2+FMA.
const KernelTable* avx2_table();

/// Table used by the library. Chosen once from the CPU, overridable with the
/// IIDGAN_KERNELS environment variable ("scalar" or "avx2").
const KernelTable& active();

/// Force a table by name ("scalar", "avx2", "auto"). Returns false if the
/// requested table is unavailable; the active table is unchanged then.
bool select(std::string_view name);

}  // namespace iidgan::kernels
