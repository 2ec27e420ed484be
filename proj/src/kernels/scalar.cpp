#include <cmath>

#include "iidgan/kernels.hpp"

namespace iidgan::kernels {
namespace {

void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
              const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * ldc;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * lda + p];
      const double* bp = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void col_sum_acc(std::size_t rows, std::size_t cols, const double* a, std::size_t lda,
                 double* out) {
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[j] += a[i * lda + j];
}

void adam_update(std::size_t n, double* param, double* grad, double* m, double* v,
                 const AdamCoeffs& c) {
  const double one_m_b1 = 1.0 - c.beta1;
  const double one_m_b2 = 1.0 - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_m_b1 * g;
    v[i] = c.beta2 * v[i] + one_m_b2 * (g * g);
    param[i] -= c.step_size * m[i] / (std::sqrt(v[i] * c.inv_bias_corr2) + c.epsilon);
    grad[i] = 0.0;
  }
}

constexpr KernelTable kTable{"scalar", &gemm_acc, &col_sum_acc, &adam_update};

}  // namespace

const KernelTable& scalar_table() { return kTable; }

}  // namespace iidgan::kernels
