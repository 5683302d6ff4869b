// On-disk feature cache, one file per utterance:
//   magic "S4KF" | version u32 | T u32 | D u32 | T*D float32, little-endian.
#pragma once

#include <filesystem>
#include <string>

#include "kws/dsp/features.h"

namespace kws::dsp {

constexpr uint32_t kFeatureCacheVersion = 1;

void write_feature_cache(const std::filesystem::path& path, const FeatureMatrix& features);
FeatureMatrix read_feature_cache(const std::filesystem::path& path);

// True if the file exists and parses as a valid cache entry.
bool feature_cache_valid(const std::filesystem::path& path);

// Stable cache file name for an audio path: "<stem>_<hash16>.feat".
std::string feature_cache_name(const std::string& audio_path);

}  // namespace kws::dsp
