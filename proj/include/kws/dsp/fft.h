// Iterative radix-2 FFT, sized for the frontend's 512-point transform.
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace kws::dsp {

// In-place complex FFT; size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& x);

// Magnitude-squared spectrum of a real signal zero-padded to n_fft.
// Returns n_fft/2 + 1 bins.
std::vector<double> power_spectrum(const double* frame, size_t frame_len, size_t n_fft);

}  // namespace kws::dsp
