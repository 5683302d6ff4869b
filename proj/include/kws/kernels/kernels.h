// Arithmetic inner loops used by the DSP frontend, the autodiff tape and the
// evaluation code. Every kernel has a scalar reference implementation and an
// AVX2 variant; the public entry points dispatch at runtime based on CPU
// support (overridable via set_backend or the KWSKIT_KERNELS env var).
//
// The two backends are equivalence-tested against each other: results may
// differ by rounding (different accumulation order, polynomial exp in the
// AVX2 float transcendentals) but never beyond the tolerances asserted in
// tests/test_kernels.cpp.
#pragma once

#include <cstddef>

namespace kws::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
void set_backend(Backend b);
bool backend_supported(Backend b);
const char* backend_name(Backend b);

// The kernel surface, declared identically for the dispatched entry points
// and for each backend namespace.
//
// gemm: C (m x n) = alpha * op(A) * op(B) + (accumulate ? C : 0), where op
// transposes its argument per trans_a / trans_b (both set is unsupported).
// op(A) is m x k, op(B) is k x n; all matrices dense row-major, no padding.
// axpy: y += alpha * x.
#define KWS_KERNEL_API(T)                                                        \
  void gemm(bool trans_a, bool trans_b, size_t m, size_t n, size_t k, T alpha,  \
            const T* a, const T* b, T* c, bool accumulate);                      \
  T dot(const T* a, const T* b, size_t n);                                       \
  T sum(const T* a, size_t n);                                                   \
  T sumsq(const T* a, size_t n);                                                 \
  void add(const T* a, const T* b, T* out, size_t n);                            \
  void sub(const T* a, const T* b, T* out, size_t n);                            \
  void mul(const T* a, const T* b, T* out, size_t n);                            \
  void axpy(T alpha, const T* x, T* y, size_t n);                                \
  void scale(T alpha, T* x, size_t n);                                           \
  void sigmoid(const T* x, T* out, size_t n);                                    \
  void tanh(const T* x, T* out, size_t n);

KWS_KERNEL_API(float)
KWS_KERNEL_API(double)

// Direct access to a specific backend, used by the equivalence tests.
namespace scalar {
KWS_KERNEL_API(float)
KWS_KERNEL_API(double)
}  // namespace scalar

// Only call these when backend_supported(Backend::avx2) is true.
namespace avx2 {
bool compiled_in();
KWS_KERNEL_API(float)
KWS_KERNEL_API(double)
}  // namespace avx2

}  // namespace kws::kernels
