// aarch64 only. NEON is architecturally guaranteed there, so no runtime
// probe is needed beyond the build-time check.
#include <arm_neon.h>

#include "bdctm/kernels.hpp"

namespace bdctm::kernels::neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + j), vld1q_f64(b + j));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + j + 2), vld1q_f64(b + j + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; j < n; ++j) s += a[j] * b[j];
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
    const float64x2_t wv = vdupq_n_f64(wi);
    std::size_t j = 0;
    for (; j + 2 <= cols; j += 2) {
      vst1q_f64(out + j, vfmaq_f64(vld1q_f64(out + j), wv, vld1q_f64(row + j)));
    }
    for (; j < cols; ++j) out[j] += wi * row[j];
  }
}

}  // namespace bdctm::kernels::neon
