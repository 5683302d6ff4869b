#include "kws/loss/sampler.h"

#include "kws/common/errors.h"

namespace kws::loss {

void BatchSpec::validate() const {
  if (num_phrases < 2) throw UsageError("batch spec: need at least 2 phrases");
  if (utts_per_phrase < 2 || utts_per_phrase % 2 != 0)
    throw UsageError("batch spec: utterances per phrase must be even and >= 2");
}

Batch sample_batch(const data::Manifest& manifest, const BatchSpec& spec, Rng& rng) {
  spec.validate();
  const auto& phrases = manifest.phrases();
  if (phrases.size() < static_cast<size_t>(spec.num_phrases))
    throw InsufficientPhrasesError("batch needs " + std::to_string(spec.num_phrases) +
                                   " phrases, manifest has " + std::to_string(phrases.size()));

  const auto phrase_pick =
      rng.sample_without_replacement(phrases.size(), static_cast<size_t>(spec.num_phrases));

  Batch batch;
  const size_t half = static_cast<size_t>(spec.enroll_per_phrase());
  for (size_t pi : phrase_pick) {
    const std::string& phrase = phrases[pi];
    const auto& ids = manifest.records_of(phrase);
    if (ids.size() < static_cast<size_t>(spec.utts_per_phrase))
      throw InsufficientUtterancesError("phrase '" + phrase + "' has " +
                                        std::to_string(ids.size()) + " utterances, batch needs " +
                                        std::to_string(spec.utts_per_phrase));
    const auto utt_pick =
        rng.sample_without_replacement(ids.size(), static_cast<size_t>(spec.utts_per_phrase));
    std::vector<size_t> enroll, test;
    for (size_t i = 0; i < half; ++i) enroll.push_back(ids[utt_pick[i]]);
    for (size_t i = half; i < utt_pick.size(); ++i) test.push_back(ids[utt_pick[i]]);
    batch.phrases.push_back(phrase);
    batch.enroll_ids.push_back(std::move(enroll));
    batch.test_ids.push_back(std::move(test));
  }
  return batch;
}

}  // namespace kws::loss
