// Compiled with -mavx2 -mfma. Only reached through the dispatcher after a
// cpuid check, so nothing here may be called unconditionally.
#include <immintrin.h>

#include "bdctm/kernels.hpp"

namespace bdctm::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j + 4), _mm256_loadu_pd(b + j + 4), acc1);
  }
  if (j + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc0);
    j += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
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
    const __m256d wv = _mm256_set1_pd(wi);
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
      __m256d o = _mm256_loadu_pd(out + j);
      o = _mm256_fmadd_pd(wv, _mm256_loadu_pd(row + j), o);
      _mm256_storeu_pd(out + j, o);
    }
    for (; j < cols; ++j) out[j] += wi * row[j];
  }
}

}  // namespace bdctm::kernels::avx2
