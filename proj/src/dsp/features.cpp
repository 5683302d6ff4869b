#include "kws/dsp/features.h"

#include <cmath>

#include "kws/common/errors.h"
#include "kws/dsp/fft.h"

namespace kws::dsp {

void AudioClip::validate() const {
  if (samples.empty()) throw EmptyInputError("audio clip has no samples");
  if (sample_rate_hz != kSampleRateHz)
    throw UnsupportedFormatError("expected " + std::to_string(kSampleRateHz) + " Hz, got " +
                                 std::to_string(sample_rate_hz) + " Hz (resampling unsupported)");
}

size_t frame_count(size_t n_samples, size_t frame_len, size_t hop) {
  if (n_samples < frame_len)
    throw TooShortError("clip of " + std::to_string(n_samples) + " samples is shorter than one " +
                        std::to_string(frame_len) + "-sample frame");
  return (n_samples - frame_len) / hop + 1;
}

std::vector<std::vector<float>> frame_signal(const AudioClip& clip, size_t frame_len, size_t hop) {
  clip.validate();
  const size_t count = frame_count(clip.samples.size(), frame_len, hop);
  std::vector<std::vector<float>> frames(count);
  for (size_t i = 0; i < count; ++i) {
    const size_t start = i * hop;
    frames[i].assign(clip.samples.begin() + start, clip.samples.begin() + start + frame_len);
  }
  return frames;
}

MelFrontend::MelFrontend(const FrontendConfig& config) : config_(config) {
  if (config_.n_mels <= 0 || config_.frame_len <= 0 || config_.hop <= 0)
    throw UsageError("frontend config values must be positive");
  if (config_.n_fft < config_.frame_len) throw UsageError("n_fft must cover the frame length");

  // Periodic Hann.
  window_.resize(config_.frame_len);
  for (int i = 0; i < config_.frame_len; ++i)
    window_[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / config_.frame_len);

  // Triangular filters with equally spaced edges on the mel scale,
  // evaluated at the FFT bin centre frequencies.
  const int n_bins = config_.n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(config_.fmin_hz);
  const double mel_hi = hz_to_mel(config_.fmax_hz);
  const double mel_step = (mel_hi - mel_lo) / (config_.n_mels + 1);
  const double bin_hz = static_cast<double>(kSampleRateHz) / config_.n_fft;

  bands_.resize(config_.n_mels);
  for (int m = 0; m < config_.n_mels; ++m) {
    const double left = mel_to_hz(mel_lo + m * mel_step);
    const double centre = mel_to_hz(mel_lo + (m + 1) * mel_step);
    const double right = mel_to_hz(mel_lo + (m + 2) * mel_step);
    Band band;
    band.first_bin = -1;
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > left && f < centre)
        w = (f - left) / (centre - left);
      else if (f >= centre && f < right)
        w = (right - f) / (right - centre);
      if (w > 0.0) {
        if (band.first_bin < 0) band.first_bin = k;
        band.weights.push_back(w);
      } else if (band.first_bin >= 0) {
        break;
      }
    }
    if (band.first_bin < 0) band.first_bin = 0;
    bands_[m] = std::move(band);
  }
}

double MelFrontend::filter_weight(int band, int bin) const {
  const Band& b = bands_[band];
  const int off = bin - b.first_bin;
  if (off < 0 || off >= static_cast<int>(b.weights.size())) return 0.0;
  return b.weights[off];
}

FeatureMatrix MelFrontend::compute(const AudioClip& clip) const {
  clip.validate();
  const size_t frame_len = static_cast<size_t>(config_.frame_len);
  const size_t n_frames = frame_count(clip.samples.size(), frame_len, config_.hop);

  FeatureMatrix out;
  out.frames = MatF(n_frames, config_.n_mels);

  std::vector<double> windowed(frame_len);
  for (size_t i = 0; i < n_frames; ++i) {
    const float* src = clip.samples.data() + i * config_.hop;
    for (size_t j = 0; j < frame_len; ++j) windowed[j] = src[j] * window_[j];
    const std::vector<double> power = power_spectrum(windowed.data(), frame_len, config_.n_fft);
    float* dst = out.frames.row(i);
    for (int m = 0; m < config_.n_mels; ++m) {
      const Band& band = bands_[m];
      double energy = 0.0;
      for (size_t k = 0; k < band.weights.size(); ++k)
        energy += band.weights[k] * power[band.first_bin + k];
      dst[m] = static_cast<float>(std::log(energy + config_.log_floor));
    }
  }
  return out;
}

}  // namespace kws::dsp
