// Runtime backend selection for the compute kernels.
#include "kws/kernels/kernels.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "kws/common/errors.h"

namespace kws::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect_backend() {
  if (const char* env = std::getenv("KWSKIT_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && backend_supported(Backend::avx2)) return Backend::avx2;
  }
  return backend_supported(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

Backend g_backend = detect_backend();

}  // namespace

Backend active_backend() { return g_backend; }

void set_backend(Backend b) {
  if (!backend_supported(b))
    throw UsageError(std::string("kernel backend not supported on this host: ") + backend_name(b));
  g_backend = b;
}

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
      return avx2::compiled_in() && cpu_has_avx2();
  }
  return false;
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "?";
}

#define KWS_DISPATCH_DEFS(T)                                                              \
  void gemm(bool ta, bool tb, size_t m, size_t n, size_t k, T alpha, const T* a,          \
            const T* b, T* c, bool acc) {                                                 \
    if (g_backend == Backend::avx2)                                                       \
      avx2::gemm(ta, tb, m, n, k, alpha, a, b, c, acc);                                   \
    else                                                                                  \
      scalar::gemm(ta, tb, m, n, k, alpha, a, b, c, acc);                                 \
  }                                                                                       \
  T dot(const T* a, const T* b, size_t n) {                                               \
    return g_backend == Backend::avx2 ? avx2::dot(a, b, n) : scalar::dot(a, b, n);        \
  }                                                                                       \
  T sum(const T* a, size_t n) {                                                           \
    return g_backend == Backend::avx2 ? avx2::sum(a, n) : scalar::sum(a, n);              \
  }                                                                                       \
  T sumsq(const T* a, size_t n) {                                                         \
    return g_backend == Backend::avx2 ? avx2::sumsq(a, n) : scalar::sumsq(a, n);          \
  }                                                                                       \
  void add(const T* a, const T* b, T* out, size_t n) {                                    \
    if (g_backend == Backend::avx2)                                                       \
      avx2::add(a, b, out, n);                                                            \
    else                                                                                  \
      scalar::add(a, b, out, n);                                                          \
  }                                                                                       \
  void sub(const T* a, const T* b, T* out, size_t n) {                                    \
    if (g_backend == Backend::avx2)                                                       \
      avx2::sub(a, b, out, n);                                                            \
    else                                                                                  \
      scalar::sub(a, b, out, n);                                                          \
  }                                                                                       \
  void mul(const T* a, const T* b, T* out, size_t n) {                                    \
    if (g_backend == Backend::avx2)                                                       \
      avx2::mul(a, b, out, n);                                                            \
    else                                                                                  \
      scalar::mul(a, b, out, n);                                                          \
  }                                                                                       \
  void axpy(T alpha, const T* x, T* y, size_t n) {                                        \
    if (g_backend == Backend::avx2)                                                       \
      avx2::axpy(alpha, x, y, n);                                                         \
    else                                                                                  \
      scalar::axpy(alpha, x, y, n);                                                       \
  }                                                                                       \
  void scale(T alpha, T* x, size_t n) {                                                   \
    if (g_backend == Backend::avx2)                                                       \
      avx2::scale(alpha, x, n);                                                           \
    else                                                                                  \
      scalar::scale(alpha, x, n);                                                         \
  }                                                                                       \
  void sigmoid(const T* x, T* out, size_t n) {                                            \
    if (g_backend == Backend::avx2)                                                       \
      avx2::sigmoid(x, out, n);                                                           \
    else                                                                                  \
      scalar::sigmoid(x, out, n);                                                         \
  }                                                                                       \
  void tanh(const T* x, T* out, size_t n) {                                               \
    if (g_backend == Backend::avx2)                                                       \
      avx2::tanh(x, out, n);                                                              \
    else                                                                                  \
      scalar::tanh(x, out, n);                                                            \
  }

KWS_DISPATCH_DEFS(float)
KWS_DISPATCH_DEFS(double)

}  // namespace kws::kernels
