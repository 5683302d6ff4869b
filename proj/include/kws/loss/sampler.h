// Training batch construction: X phrases, Y utterances per phrase, half of
// each phrase's draw reserved for the enrollment centroid and half for test.
#pragma once

#include <string>
#include <vector>

#include "kws/common/rng.h"
#include "kws/data/manifest.h"

namespace kws::loss {

struct BatchSpec {
  int num_phrases = 8;      // X
  int utts_per_phrase = 10;  // Y, even

  int enroll_per_phrase() const { return utts_per_phrase / 2; }
  void validate() const;
};

struct Batch {
  std::vector<std::string> phrases;            // X entries
  std::vector<std::vector<size_t>> enroll_ids;  // X lists of Y/2 manifest record ids
  std::vector<std::vector<size_t>> test_ids;    // X lists of Y/2 manifest record ids
};

// X distinct phrases uniformly; per phrase Y utterances without
// replacement, first half enrollment, second half test.
Batch sample_batch(const data::Manifest& manifest, const BatchSpec& spec, Rng& rng);

}  // namespace kws::loss
