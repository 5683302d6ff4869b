// RIFF/WAVE reader and writer, PCM 16-bit little-endian mono at 16 kHz.
// Anything else is rejected; resampling is out of scope.
#pragma once

#include <filesystem>
#include <vector>

#include "kws/dsp/features.h"

namespace kws::data {

// Samples scaled to [-1, 1] by 1/32768.
dsp::AudioClip read_wav(const std::filesystem::path& path);

void write_wav_pcm16(const std::filesystem::path& path, const std::vector<float>& samples,
                     int sample_rate_hz = dsp::kSampleRateHz);

}  // namespace kws::data
