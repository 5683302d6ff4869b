// Log-mel feature frontend: 16 kHz mono in, T x 40 log filterbank energies
// out. 25 ms Hann-windowed frames with 10 ms hop, 512-point FFT and 40
// triangular mel filters spanning 125-7500 Hz.
#pragma once

#include <cstddef>
#include <vector>

#include "kws/common/matrix.h"

namespace kws::dsp {

constexpr int kSampleRateHz = 16000;

struct AudioClip {
  std::vector<float> samples;  // [-1, 1]
  int sample_rate_hz = kSampleRateHz;

  void validate() const;
};

struct FrontendConfig {
  int frame_len = 400;  // 25 ms at 16 kHz
  int hop = 160;        // 10 ms
  int n_fft = 512;
  int n_mels = 40;
  double fmin_hz = 125.0;
  double fmax_hz = 7500.0;
  double log_floor = 1e-6;
};

struct FeatureMatrix {
  MatF frames;  // T x n_mels

  size_t num_frames() const { return frames.rows(); }
  size_t dim() const { return frames.cols(); }
};

// floor((n_samples - frame_len) / hop) + 1; throws TooShortError if
// n_samples < frame_len.
size_t frame_count(size_t n_samples, size_t frame_len = 400, size_t hop = 160);

// Frame i covers samples [i*hop, i*hop + frame_len).
std::vector<std::vector<float>> frame_signal(const AudioClip& clip, size_t frame_len = 400,
                                             size_t hop = 160);

class MelFrontend {
 public:
  explicit MelFrontend(const FrontendConfig& config = {});

  FeatureMatrix compute(const AudioClip& clip) const;

  const FrontendConfig& config() const { return config_; }

  // Filter weight for (mel band, fft bin); exposed for tests.
  double filter_weight(int band, int bin) const;

 private:
  FrontendConfig config_;
  std::vector<double> window_;  // periodic Hann, frame_len points
  struct Band {
    int first_bin;
    std::vector<double> weights;
  };
  std::vector<Band> bands_;
};

inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

}  // namespace kws::dsp
