// Scalar reference kernels. These are the ground truth the SIMD variants are
// tested against; keep them simple and obviously correct.
#include <cmath>
#include <cstring>

#include "kws/common/errors.h"
#include "kws/kernels/kernels.h"

namespace kws::kernels::scalar {

namespace {

template <typename T>
void gemm_impl(bool trans_a, bool trans_b, size_t m, size_t n, size_t k, T alpha,
               const T* a, const T* b, T* c, bool accumulate) {
  if (trans_a && trans_b) throw ShapeMismatchError("gemm: trans_a && trans_b unsupported");
  if (!accumulate) std::memset(c, 0, m * n * sizeof(T));
  if (!trans_a && !trans_b) {
    // A: m x k, B: k x n
    for (size_t i = 0; i < m; ++i) {
      T* crow = c + i * n;
      for (size_t p = 0; p < k; ++p) {
        const T av = alpha * a[i * k + p];
        const T* brow = b + p * n;
        for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else if (!trans_a && trans_b) {
    // A: m x k, B: n x k
    for (size_t i = 0; i < m; ++i) {
      const T* arow = a + i * k;
      T* crow = c + i * n;
      for (size_t j = 0; j < n; ++j) {
        const T* brow = b + j * k;
        T acc = 0;
        for (size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
        crow[j] += alpha * acc;
      }
    }
  } else {
    // A: k x m, B: k x n
    for (size_t p = 0; p < k; ++p) {
      const T* arow = a + p * m;
      const T* brow = b + p * n;
      for (size_t i = 0; i < m; ++i) {
        const T av = alpha * arow[i];
        T* crow = c + i * n;
        for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  }
}

template <typename T>
T dot_impl(const T* a, const T* b, size_t n) {
  T acc = 0;
  for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
T sum_impl(const T* a, size_t n) {
  T acc = 0;
  for (size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

template <typename T>
T sumsq_impl(const T* a, size_t n) {
  T acc = 0;
  for (size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

}  // namespace

#define KWS_SCALAR_DEFS(T)                                                             \
  void gemm(bool ta, bool tb, size_t m, size_t n, size_t k, T alpha, const T* a,       \
            const T* b, T* c, bool acc) {                                              \
    gemm_impl<T>(ta, tb, m, n, k, alpha, a, b, c, acc);                                \
  }                                                                                    \
  T dot(const T* a, const T* b, size_t n) { return dot_impl<T>(a, b, n); }             \
  T sum(const T* a, size_t n) { return sum_impl<T>(a, n); }                            \
  T sumsq(const T* a, size_t n) { return sumsq_impl<T>(a, n); }                        \
  void add(const T* a, const T* b, T* out, size_t n) {                                 \
    for (size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];                               \
  }                                                                                    \
  void sub(const T* a, const T* b, T* out, size_t n) {                                 \
    for (size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];                               \
  }                                                                                    \
  void mul(const T* a, const T* b, T* out, size_t n) {                                 \
    for (size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];                               \
  }                                                                                    \
  void axpy(T alpha, const T* x, T* y, size_t n) {                                     \
    for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];                               \
  }                                                                                    \
  void scale(T alpha, T* x, size_t n) {                                                \
    for (size_t i = 0; i < n; ++i) x[i] *= alpha;                                      \
  }                                                                                    \
  void sigmoid(const T* x, T* out, size_t n) {                                         \
    for (size_t i = 0; i < n; ++i) out[i] = T(1) / (T(1) + std::exp(-x[i]));           \
  }                                                                                    \
  void tanh(const T* x, T* out, size_t n) {                                            \
    for (size_t i = 0; i < n; ++i) out[i] = std::tanh(x[i]);                           \
  }

KWS_SCALAR_DEFS(float)
KWS_SCALAR_DEFS(double)

#undef KWS_SCALAR_DEFS

}  // namespace kws::kernels::scalar
