#pragma once
// Dense inner loops of the likelihood.
//
// Every kernel has a scalar reference implementation and, where the build
// and the CPU allow, a SIMD variant (AVX2+FMA on x86-64, NEON on aarch64).
// The active backend is chosen once at startup from the CPU feature bits and
// can be overridden with BDCTM_SIMD=scalar|avx2|neon or set_backend().
//
// Matrices are row-major with an explicit row stride (>= cols).

#include <cstddef>
#include <span>
#include <string_view>

namespace bdctm::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  /// out[i] = sum_j x[i*stride + j] * v[j], i < rows, j < cols.
  void (*gemv)(const double* x, std::size_t rows, std::size_t cols, std::size_t stride,
               const double* v, double* out);
  /// out[j] += sum_i x[i*stride + j] * w[i].
  void (*gemv_t_acc)(const double* x, std::size_t rows, std::size_t cols, std::size_t stride,
                     const double* w, double* out);
  double (*dot)(const double* a, const double* b, std::size_t n);
};

namespace scalar {
void gemv(const double* x, std::size_t rows, std::size_t cols, std::size_t stride,
          const double* v, double* out);
void gemv_t_acc(const double* x, std::size_t rows, std::size_t cols, std::size_t stride,
                const double* w, double* out);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace scalar

namespace avx2 {
void gemv(const double* x, std::size_t rows, std::size_t cols, std::size_t stride,
          const double* v, double* out);
void gemv_t_acc(const double* x, std::size_t rows, std::size_t cols, std::size_t stride,
                const double* w, double* out);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace avx2

namespace neon {
void gemv(const double* x, std::size_t rows, std::size_t cols, std::size_t stride,
          const double* v, double* out);
void gemv_t_acc(const double* x, std::size_t rows, std::size_t cols, std::size_t stride,
                const double* w, double* out);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace neon

/// True when the variant was compiled in and the running CPU supports it.
bool available(Backend b);

/// Currently selected backend.
Backend backend();

/// Select a backend; throws DomainError when it is not available.
void set_backend(Backend b);

std::string_view backend_name(Backend b);
Backend parse_backend(std::string_view name);

const KernelTable& table(Backend b);
const KernelTable& active();

// Span conveniences over the active backend.
inline void gemv(std::span<const double> x, std::size_t rows, std::size_t cols,
                 std::size_t stride, std::span<const double> v, std::span<double> out) {
  active().gemv(x.data(), rows, cols, stride, v.data(), out.data());
}
inline void gemv_t_acc(std::span<const double> x, std::size_t rows, std::size_t cols,
                       std::size_t stride, std::span<const double> w, std::span<double> out) {
  active().gemv_t_acc(x.data(), rows, cols, stride, w.data(), out.data());
}
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

}  // namespace bdctm::kernels
