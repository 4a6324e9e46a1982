#include "bdctm/kernels.hpp"

namespace bdctm::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += a[j] * b[j];
  return s;
}

void gemv(const double* x, std::size_t rows, std::size_t cols, std::size_t stride,
          const double* v, double* out) {
  for (std::size_t i = 0; i < rows; ++i) out[i] = dot(x + i * stride, v, cols);
}

void gemv_t_acc(const double* x, std::size_t rows, std::size_t cols, std::size_t stride,
                const double* w, double* out) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double wi = w[i];
    if (wi == 0.0) continue;
    const double* row = x + i * stride;
    for (std::size_t j = 0; j < cols; ++j) out[j] += wi * row[j];
  }
}

}  // namespace bdctm::kernels::scalar
