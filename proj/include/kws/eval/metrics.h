// Keyword-matching evaluation: per-phrase enrollment centroids, cosine
// scoring of every test utterance against every centroid, DET curves over a
// 0.00..1.00 threshold grid (stride 0.01, accept when score > t), EER by
// linear interpolation of the FAR/FRR crossing, AUC as the trapezoidal area
// under the full-range DET curve, and unweighted cross-phrase averages.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kws/common/matrix.h"
#include "kws/data/manifest.h"

namespace kws::eval {

struct EvalSplit {
  struct PhraseSplit {
    std::string phrase;
    std::vector<size_t> enroll_ids;  // manifest record ids
    std::vector<size_t> test_ids;
  };
  std::vector<PhraseSplit> phrases;
  uint64_t seed = 0;
};

// Per phrase: n_enroll utterances for the centroid, the rest for testing.
// Every phrase must have more than n_enroll utterances.
EvalSplit make_eval_split(const data::Manifest& manifest, int n_enroll, uint64_t seed);

struct PhraseScores {
  std::string phrase;
  std::vector<double> pos;  // test utterances of this phrase vs its centroid
  std::vector<double> neg;  // test utterances of all other phrases vs it
};

// embeddings_by_record: one unit-norm row per manifest record id.
std::vector<PhraseScores> score_all(const MatF& embeddings_by_record, const EvalSplit& split);

struct DetPoint {
  double threshold;
  double far;
  double frr;
};

struct DetCurve {
  std::vector<DetPoint> points;  // 101 points, thresholds 0.00 .. 1.00
};

DetCurve det_curve(std::span<const double> pos_scores, std::span<const double> neg_scores);

// Percent at the FAR = FRR crossing, linearly interpolated between grid
// thresholds.
double eer_percent(const DetCurve& curve);

// Percent area under FRR d(FAR), padded to span FAR in [0, 1]:
// prepend (0, max FRR at FAR=0, or 1 if FAR=0 never occurs) and append
// (1, 0).
double auc_percent(const DetCurve& curve);

struct PhraseMetrics {
  std::string phrase;
  double eer_percent = 0.0;
  double auc_percent = 0.0;
  int64_t n_pos = 0;
  int64_t n_neg = 0;
};

PhraseMetrics phrase_metrics(const PhraseScores& scores);

struct AggregateMetrics {
  double mean_eer_percent = 0.0;
  double mean_auc_percent = 0.0;
  size_t num_phrases = 0;
};

AggregateMetrics aggregate(const std::vector<PhraseMetrics>& metrics);

// 100 bins over [0, 1]; scores below 0 clamp into bin 0, a score of 1.0
// lands in the last bin.
struct ScoreHistogram {
  std::array<int64_t, 100> pos{};
  std::array<int64_t, 100> neg{};
};

ScoreHistogram score_histogram(std::span<const double> pos_scores,
                               std::span<const double> neg_scores);

// CSV emitters (fixed numeric formats so identical runs are byte-identical).
void write_phrase_metrics_csv(const std::filesystem::path& path,
                              const std::vector<PhraseMetrics>& metrics,
                              const AggregateMetrics& agg);
void write_det_csv(const std::filesystem::path& path, const DetCurve& curve);
void write_histogram_csv(const std::filesystem::path& path, const ScoreHistogram& hist);

}  // namespace kws::eval
