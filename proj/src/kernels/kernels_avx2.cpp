// AVX2 kernel variants. This translation unit is compiled with -mavx2 -mfma
// and must only be entered through the runtime dispatcher after a CPU
// support check. Float transcendentals use a polynomial exp (single-ulp
// class accuracy); the double variants of sigmoid/tanh delegate to the
// scalar reference since they exist for gradient checking, not speed.
#include <cmath>
#include <cstring>

#include "kws/common/errors.h"
#include "kws/kernels/kernels.h"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace kws::kernels::avx2 {

bool compiled_in() {
#if defined(__AVX2__)
  return true;
#else
  return false;
#endif
}

#if defined(__AVX2__)

namespace {

inline float hsum8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 sh = _mm_movehl_ps(lo, lo);
  lo = _mm_add_ps(lo, sh);
  sh = _mm_shuffle_ps(lo, lo, 0x1);
  lo = _mm_add_ss(lo, sh);
  return _mm_cvtss_f32(lo);
}

inline double hsum4(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  lo = _mm_add_sd(lo, sh);
  return _mm_cvtsd_f64(lo);
}

// exp for 8 floats, Cephes-style: range-reduce by powers of two, degree-5
// polynomial on the remainder, reassemble via the exponent bits.
inline __m256 exp8(__m256 x) {
  const __m256 hi = _mm256_set1_ps(88.3762626647949f);
  const __m256 lo = _mm256_set1_ps(-88.3762626647949f);
  const __m256 log2e = _mm256_set1_ps(1.44269504088896341f);
  const __m256 ln2_hi = _mm256_set1_ps(0.693359375f);
  const __m256 ln2_lo = _mm256_set1_ps(-2.12194440e-4f);
  const __m256 one = _mm256_set1_ps(1.0f);

  x = _mm256_max_ps(_mm256_min_ps(x, hi), lo);
  __m256 fx = _mm256_fmadd_ps(x, log2e, _mm256_set1_ps(0.5f));
  fx = _mm256_floor_ps(fx);
  x = _mm256_fnmadd_ps(fx, ln2_hi, x);
  x = _mm256_fnmadd_ps(fx, ln2_lo, x);

  __m256 y = _mm256_set1_ps(1.9875691500e-4f);
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.3981999507e-3f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(8.3334519073e-3f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(4.1665795894e-2f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.6666665459e-1f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(5.0000001201e-1f));
  y = _mm256_fmadd_ps(y, _mm256_mul_ps(x, x), x);
  y = _mm256_add_ps(y, one);

  __m256i n = _mm256_cvttps_epi32(fx);
  n = _mm256_add_epi32(n, _mm256_set1_epi32(0x7f));
  n = _mm256_slli_epi32(n, 23);
  return _mm256_mul_ps(y, _mm256_castsi256_ps(n));
}

}  // namespace

void gemm(bool trans_a, bool trans_b, size_t m, size_t n, size_t k, float alpha,
          const float* a, const float* b, float* c, bool accumulate) {
  if (trans_a && trans_b) throw ShapeMismatchError("gemm: trans_a && trans_b unsupported");
  if (!accumulate) std::memset(c, 0, m * n * sizeof(float));
  const size_t n8 = n & ~size_t(7);
  if (!trans_a && !trans_b) {
    for (size_t i = 0; i < m; ++i) {
      float* crow = c + i * n;
      for (size_t p = 0; p < k; ++p) {
        const float av = alpha * a[i * k + p];
        const __m256 vav = _mm256_set1_ps(av);
        const float* brow = b + p * n;
        size_t j = 0;
        for (; j < n8; j += 8) {
          __m256 vc = _mm256_loadu_ps(crow + j);
          vc = _mm256_fmadd_ps(vav, _mm256_loadu_ps(brow + j), vc);
          _mm256_storeu_ps(crow + j, vc);
        }
        for (; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else if (!trans_a && trans_b) {
    const size_t k8 = k & ~size_t(7);
    for (size_t i = 0; i < m; ++i) {
      const float* arow = a + i * k;
      float* crow = c + i * n;
      for (size_t j = 0; j < n; ++j) {
        const float* brow = b + j * k;
        __m256 acc0 = _mm256_setzero_ps();
        __m256 acc1 = _mm256_setzero_ps();
        size_t p = 0;
        for (; p + 16 <= k; p += 16) {
          acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p), _mm256_loadu_ps(brow + p), acc0);
          acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p + 8), _mm256_loadu_ps(brow + p + 8), acc1);
        }
        for (; p < k8; p += 8)
          acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p), _mm256_loadu_ps(brow + p), acc0);
        float acc = hsum8(_mm256_add_ps(acc0, acc1));
        for (; p < k; ++p) acc += arow[p] * brow[p];
        crow[j] += alpha * acc;
      }
    }
  } else {
    for (size_t p = 0; p < k; ++p) {
      const float* arow = a + p * m;
      const float* brow = b + p * n;
      for (size_t i = 0; i < m; ++i) {
        const float av = alpha * arow[i];
        const __m256 vav = _mm256_set1_ps(av);
        float* crow = c + i * n;
        size_t j = 0;
        for (; j < n8; j += 8) {
          __m256 vc = _mm256_loadu_ps(crow + j);
          vc = _mm256_fmadd_ps(vav, _mm256_loadu_ps(brow + j), vc);
          _mm256_storeu_ps(crow + j, vc);
        }
        for (; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  }
}

void gemm(bool trans_a, bool trans_b, size_t m, size_t n, size_t k, double alpha,
          const double* a, const double* b, double* c, bool accumulate) {
  if (trans_a && trans_b) throw ShapeMismatchError("gemm: trans_a && trans_b unsupported");
  if (!accumulate) std::memset(c, 0, m * n * sizeof(double));
  const size_t n4 = n & ~size_t(3);
  if (!trans_a && !trans_b) {
    for (size_t i = 0; i < m; ++i) {
      double* crow = c + i * n;
      for (size_t p = 0; p < k; ++p) {
        const double av = alpha * a[i * k + p];
        const __m256d vav = _mm256_set1_pd(av);
        const double* brow = b + p * n;
        size_t j = 0;
        for (; j < n4; j += 4) {
          __m256d vc = _mm256_loadu_pd(crow + j);
          vc = _mm256_fmadd_pd(vav, _mm256_loadu_pd(brow + j), vc);
          _mm256_storeu_pd(crow + j, vc);
        }
        for (; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else if (!trans_a && trans_b) {
    const size_t k4 = k & ~size_t(3);
    for (size_t i = 0; i < m; ++i) {
      const double* arow = a + i * k;
      double* crow = c + i * n;
      for (size_t j = 0; j < n; ++j) {
        const double* brow = b + j * k;
        __m256d acc0 = _mm256_setzero_pd();
        size_t p = 0;
        for (; p < k4; p += 4)
          acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + p), _mm256_loadu_pd(brow + p), acc0);
        double acc = hsum4(acc0);
        for (; p < k; ++p) acc += arow[p] * brow[p];
        crow[j] += alpha * acc;
      }
    }
  } else {
    for (size_t p = 0; p < k; ++p) {
      const double* arow = a + p * m;
      const double* brow = b + p * n;
      for (size_t i = 0; i < m; ++i) {
        const double av = alpha * arow[i];
        const __m256d vav = _mm256_set1_pd(av);
        double* crow = c + i * n;
        size_t j = 0;
        for (; j < n4; j += 4) {
          __m256d vc = _mm256_loadu_pd(crow + j);
          vc = _mm256_fmadd_pd(vav, _mm256_loadu_pd(brow + j), vc);
          _mm256_storeu_pd(crow + j, vc);
        }
        for (; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  }
}

float dot(const float* a, const float* b, size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8)
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  float acc = hsum8(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double dot(const double* a, const double* b, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum4(acc0);
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

float sum(const float* a, size_t n) {
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(a + i));
  float s = hsum8(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

double sum(const double* a, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double s = hsum4(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

float sumsq(const float* a, size_t n) {
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(a + i);
    acc = _mm256_fmadd_ps(v, v, acc);
  }
  float s = hsum8(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

double sumsq(const double* a, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum4(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

void add(const float* a, const float* b, float* out, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void add(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(const float* a, const float* b, float* out, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void sub(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(const float* a, const float* b, float* out, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void mul(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy(float alpha, const float* x, float* y, size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void axpy(double alpha, const double* x, double* y, size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale(float alpha, float* x, size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(x + i, _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void scale(double alpha, double* x, size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void sigmoid(const float* x, float* out, size_t n) {
  // sigma saturates to exactly 1.0f / 0.0f well inside +-30, so clamping
  // first keeps exp8 in a safe range without changing any output.
  const __m256 lim = _mm256_set1_ps(30.0f);
  const __m256 one = _mm256_set1_ps(1.0f);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    v = _mm256_max_ps(_mm256_min_ps(v, lim), _mm256_sub_ps(_mm256_setzero_ps(), lim));
    __m256 e = exp8(_mm256_sub_ps(_mm256_setzero_ps(), v));
    _mm256_storeu_ps(out + i, _mm256_div_ps(one, _mm256_add_ps(one, e)));
  }
  for (; i < n; ++i) out[i] = 1.0f / (1.0f + std::exp(-x[i]));
}

void sigmoid(const double* x, double* out, size_t n) { scalar::sigmoid(x, out, n); }

void tanh(const float* x, float* out, size_t n) {
  // tanh(x) = (1 - e^(-2x)) / (1 + e^(-2x))
  const __m256 lim = _mm256_set1_ps(15.0f);
  const __m256 one = _mm256_set1_ps(1.0f);
  const __m256 mtwo = _mm256_set1_ps(-2.0f);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    v = _mm256_max_ps(_mm256_min_ps(v, lim), _mm256_sub_ps(_mm256_setzero_ps(), lim));
    __m256 e = exp8(_mm256_mul_ps(mtwo, v));
    _mm256_storeu_ps(out + i, _mm256_div_ps(_mm256_sub_ps(one, e), _mm256_add_ps(one, e)));
  }
  for (; i < n; ++i) out[i] = std::tanh(x[i]);
}

void tanh(const double* x, double* out, size_t n) { scalar::tanh(x, out, n); }

#else  // !__AVX2__: stubs so the library links on other architectures.

namespace {
[[noreturn]] void unavailable() { throw Error("avx2 kernels not compiled in"); }
}  // namespace

#define KWS_AVX2_STUBS(T)                                                                  \
  void gemm(bool, bool, size_t, size_t, size_t, T, const T*, const T*, T*, bool) {         \
    unavailable();                                                                         \
  }                                                                                        \
  T dot(const T*, const T*, size_t) { unavailable(); }                                     \
  T sum(const T*, size_t) { unavailable(); }                                               \
  T sumsq(const T*, size_t) { unavailable(); }                                             \
  void add(const T*, const T*, T*, size_t) { unavailable(); }                              \
  void sub(const T*, const T*, T*, size_t) { unavailable(); }                              \
  void mul(const T*, const T*, T*, size_t) { unavailable(); }                              \
  void axpy(T, const T*, T*, size_t) { unavailable(); }                                    \
  void scale(T, T*, size_t) { unavailable(); }                                             \
  void sigmoid(const T*, T*, size_t) { unavailable(); }                                    \
  void tanh(const T*, T*, size_t) { unavailable(); }

KWS_AVX2_STUBS(float)
KWS_AVX2_STUBS(double)

#endif

}  // namespace kws::kernels::avx2
