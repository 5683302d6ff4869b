// Deterministic synthetic-utterance generator used for desk-scale runs.
// Each phrase maps to a distinct 3-tone frequency signature in 300-3000 Hz;
// utterances vary by speaker (per-speaker +-3% frequency shift), amplitude
// (+-20%), duration (0.8-1.2 s), a prosody-dependent amplitude envelope and
// Gaussian noise at 20 dB SNR. Same seed, bit-identical corpus.
#pragma once

#include <cstdint>
#include <filesystem>

#include "kws/data/manifest.h"

namespace kws::data {

struct ToyGenConfig {
  size_t n_phrases = 20;
  size_t per_phrase = 40;
  size_t n_speakers = 50;
  uint64_t seed = 1;
  // Prepended to generated phrase names; lets callers build corpora with
  // guaranteed-disjoint phrase sets.
  std::string phrase_prefix;
};

// Writes WAV files under out_dir/<phrase>/ plus out_dir/manifest.jsonl and
// returns the manifest (records carry paths relative to out_dir).
Manifest toy_generate(const ToyGenConfig& config, const std::filesystem::path& out_dir);

}  // namespace kws::data
