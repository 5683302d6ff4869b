#include "kws/data/toygen.h"

#include <array>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "kws/common/errors.h"
#include "kws/common/rng.h"
#include "kws/data/wav.h"
#include "kws/dsp/features.h"

namespace kws::data {

namespace {

constexpr double kToneLoHz = 300.0;
constexpr double kToneHiHz = 3000.0;
constexpr int kTonesPerPhrase = 3;
// Signatures collide when every tone is within this distance of the other
// signature's corresponding tone; collisions are redrawn.
constexpr double kMinToneGapHz = 150.0;
constexpr int kNumProsodies = 5;

using Signature = std::array<double, kTonesPerPhrase>;

bool collides(const Signature& a, const Signature& b) {
  for (int i = 0; i < kTonesPerPhrase; ++i)
    if (std::fabs(a[i] - b[i]) >= kMinToneGapHz) return false;
  return true;
}

std::string make_word(Rng& rng) {
  static const char* consonants = "bdgkmnprstvz";
  static const char* vowels = "aeiou";
  const int syllables = 2 + static_cast<int>(rng.below(2));
  std::string word;
  for (int s = 0; s < syllables; ++s) {
    word.push_back(consonants[rng.below(12)]);
    word.push_back(vowels[rng.below(5)]);
  }
  return word;
}

// Amplitude envelope per prosody id, evaluated at position p in [0, 1].
double prosody_gain(int prosody, double p) {
  switch (prosody) {
    case 1:
      return 0.85 + 0.30 * p;  // rising
    case 2:
      return 1.15 - 0.30 * p;  // falling
    case 3:
      return 0.85 + 0.30 * std::sin(M_PI * p);  // arch
    case 4:
      return 1.15 - 0.30 * std::sin(M_PI * p);  // dip
    default:
      return 1.0;  // flat
  }
}

}  // namespace

Manifest toy_generate(const ToyGenConfig& config, const std::filesystem::path& out_dir) {
  if (config.n_phrases == 0) throw UsageError("toy_generate: need at least one phrase");
  if (config.per_phrase == 0) throw UsageError("toy_generate: need at least one utterance");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  Rng master(config.seed);
  Rng phrase_rng = master.fork(1);
  Rng speaker_rng = master.fork(2);

  // Distinct names and distinct tone signatures, redrawn on collision.
  std::vector<std::string> names;
  std::vector<Signature> signatures;
  std::set<std::string> used_names;
  for (size_t i = 0; i < config.n_phrases; ++i) {
    std::string name;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 1000) throw Error("toy_generate: cannot draw a fresh phrase name");
      name = config.phrase_prefix + make_word(phrase_rng);
      if (used_names.insert(name).second) break;
    }
    Signature sig;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 1000) throw Error("toy_generate: cannot draw a distinct tone signature");
      for (int t = 0; t < kTonesPerPhrase; ++t)
        sig[t] = phrase_rng.uniform(kToneLoHz, kToneHiHz);
      bool ok = true;
      for (const Signature& other : signatures)
        if (collides(sig, other)) {
          ok = false;
          break;
        }
      if (ok) break;
    }
    names.push_back(name);
    signatures.push_back(sig);
  }

  std::vector<double> speaker_shift(config.n_speakers);
  for (size_t s = 0; s < config.n_speakers; ++s)
    speaker_shift[s] = speaker_rng.uniform(0.97, 1.03);

  Manifest manifest;
  manifest.set_base_dir(out_dir);
  const double sr = dsp::kSampleRateHz;
  const size_t ramp = static_cast<size_t>(0.005 * sr);  // 5 ms tone on/offsets

  for (size_t pi = 0; pi < config.n_phrases; ++pi) {
    const std::filesystem::path phrase_dir = out_dir / names[pi];
    std::filesystem::create_directories(phrase_dir, ec);
    if (ec) throw IoError("cannot create " + phrase_dir.string() + ": " + ec.message());

    for (size_t ui = 0; ui < config.per_phrase; ++ui) {
      // Per-utterance stream keyed by (phrase, utterance) so generation is
      // order-independent.
      Rng rng = master.fork(1000 + pi * 100000 + ui);
      const size_t speaker = rng.below(config.n_speakers);
      const int prosody = static_cast<int>(rng.below(kNumProsodies));
      const double amplitude = 0.5 * rng.uniform(0.8, 1.2);
      const double duration = rng.uniform(0.8, 1.2);
      const size_t n = static_cast<size_t>(std::lround(duration * sr));

      std::vector<float> samples(n);
      const size_t seg = n / kTonesPerPhrase;
      for (size_t i = 0; i < n; ++i) {
        const size_t tone_idx = std::min<size_t>(i / seg, kTonesPerPhrase - 1);
        const double freq = signatures[pi][tone_idx] * speaker_shift[speaker];
        const size_t seg_start = tone_idx * seg;
        const size_t seg_len = tone_idx == kTonesPerPhrase - 1 ? n - seg_start : seg;
        const size_t off = i - seg_start;
        double gain = 1.0;
        if (off < ramp) gain = 0.5 - 0.5 * std::cos(M_PI * off / ramp);
        const size_t tail = seg_len - off;
        if (tail <= ramp) gain = std::min(gain, 0.5 - 0.5 * std::cos(M_PI * tail / ramp));
        const double env = prosody_gain(prosody, static_cast<double>(i) / n);
        samples[i] = static_cast<float>(amplitude * env * gain *
                                        std::sin(2.0 * M_PI * freq * (i - seg_start) / sr));
      }

      // Gaussian noise at 20 dB SNR relative to the tone signal.
      double power = 0.0;
      for (float v : samples) power += static_cast<double>(v) * v;
      const double sigma = std::sqrt(power / n) / 10.0;
      for (float& v : samples) {
        double x = v + sigma * rng.normal();
        v = static_cast<float>(std::min(0.999, std::max(-0.999, x)));
      }

      char file[128];
      std::snprintf(file, sizeof(file), "%s_%04zu_spk%03zu.wav", names[pi].c_str(), ui, speaker);
      write_wav_pcm16(phrase_dir / file, samples);

      UtteranceRecord rec;
      rec.path = (std::filesystem::path(names[pi]) / file).string();
      rec.phrase = names[pi];
      rec.source = Source::tts;
      rec.speaker_id = "spk" + std::to_string(speaker);
      rec.prosody_id = "p" + std::to_string(prosody);
      manifest.add(std::move(rec));
    }
  }

  write_manifest(manifest, out_dir / "manifest.jsonl");
  return manifest;
}

}  // namespace kws::data
