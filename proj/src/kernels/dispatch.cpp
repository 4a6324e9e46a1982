#include <atomic>
#include <cstdlib>
#include <string>

#include "bdctm/error.hpp"
#include "bdctm/kernels.hpp"

namespace bdctm::kernels {

namespace {

constexpr KernelTable kScalar{&scalar::gemv, &scalar::gemv_t_acc, &scalar::dot};
#ifdef BDCTM_HAVE_AVX2_TU
constexpr KernelTable kAvx2{&avx2::gemv, &avx2::gemv_t_acc, &avx2::dot};
#endif
#ifdef BDCTM_HAVE_NEON_TU
constexpr KernelTable kNeon{&neon::gemv, &neon::gemv_t_acc, &neon::dot};
#endif

bool cpu_has_avx2() {
#if defined(BDCTM_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  static const bool has = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return has;
#else
  return false;
#endif
}

Backend detect() {
  if (const char* env = std::getenv("BDCTM_SIMD"); env != nullptr && *env != '\0') {
    const Backend wanted = parse_backend(env);
    if (available(wanted)) return wanted;
  }
  if (available(Backend::Avx2)) return Backend::Avx2;
  if (available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{detect()};
  return b;
}

}  // namespace

bool available(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return cpu_has_avx2();
    case Backend::Neon:
#ifdef BDCTM_HAVE_NEON_TU
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!available(b)) {
    throw DomainError("SIMD backend '" + std::string(backend_name(b)) + "' is not available");
  }
  current().store(b, std::memory_order_relaxed);
}

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "scalar";
}

Backend parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::Scalar;
  if (name == "avx2") return Backend::Avx2;
  if (name == "neon") return Backend::Neon;
  throw DomainError("unknown SIMD backend '" + std::string(name) + "'");
}

const KernelTable& table(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return kScalar;
    case Backend::Avx2:
#ifdef BDCTM_HAVE_AVX2_TU
      if (cpu_has_avx2()) return kAvx2;
#endif
      break;
    case Backend::Neon:
#ifdef BDCTM_HAVE_NEON_TU
      return kNeon;
#endif
      break;
  }
  throw DomainError("SIMD backend '" + std::string(backend_name(b)) + "' is not available");
}

const KernelTable& active() { return table(backend()); }

}  // namespace bdctm::kernels
