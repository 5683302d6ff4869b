#include "kws/dsp/fft.h"

#include <cmath>

#include "kws/common/errors.h"

namespace kws::dsp {

void fft_inplace(std::vector<std::complex<double>>& x) {
  const size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0) throw ShapeMismatchError("fft size must be a power of two");

  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = x[i + j];
        const std::complex<double> v = x[i + j + len / 2] * w;
        x[i + j] = u + v;
        x[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<double> power_spectrum(const double* frame, size_t frame_len, size_t n_fft) {
  std::vector<std::complex<double>> buf(n_fft, {0.0, 0.0});
  for (size_t i = 0; i < frame_len && i < n_fft; ++i) buf[i] = {frame[i], 0.0};
  fft_inplace(buf);
  std::vector<double> out(n_fft / 2 + 1);
  for (size_t k = 0; k < out.size(); ++k) out[k] = std::norm(buf[k]);
  return out;
}

}  // namespace kws::dsp
