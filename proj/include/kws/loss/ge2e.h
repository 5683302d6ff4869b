// Centroid-based batch loss: each test utterance embedding is scored
// against every phrase's enrollment centroid by cosine, logits are an
// affine w*s + b of the cosines, and per-pair binary cross-entropy is
// averaged with negatives downweighted by gamma:
//   loss = (sum_pos bce + gamma * sum_neg bce) / (n_pos + gamma * n_neg)
// A batch of X phrases with Y/2 test utterances each yields n_pos = X*Y/2
// and n_neg = X*(X-1)*Y/2 pairs.
#pragma once

#include <vector>

#include "kws/autodiff/tape.h"
#include "kws/common/matrix.h"

namespace kws::loss {

struct LossConfig {
  double gamma = 1.0 / 7.0;  // negative-pair weight; 1/(X-1) balances mass at X=8
  double w_scale_init = 10.0;
  double b_shift_init = -5.0;
  // w_scale is clamped to at least this after every optimizer step.
  double w_scale_floor = 1e-3;

  void validate() const;
};

// Row-normalized per-group means. Embeddings are grouped consecutively,
// per_group rows per group; throws DegenerateCentroidError when a group
// mean has norm below 1e-8.
template <typename T>
Matrix<T> centroids(const Matrix<T>& embeddings, size_t per_group);

// S[i][j] = dot(test row i, centroid row j); rows must be unit-norm for the
// values to be cosines.
template <typename T>
Matrix<T> similarity_matrix(const Matrix<T>& test_embeddings, const Matrix<T>& cents);

struct LossResult {
  double loss = 0.0;
  int64_t n_pos = 0;
  int64_t n_neg = 0;
};

// Reference (non-differentiable) loss over a similarity matrix; labels[i]
// is the phrase column of test row i. w and b are the affine logit scalars.
template <typename T>
LossResult ge2e_triplet_loss(const Matrix<T>& similarities, const std::vector<int>& labels,
                             const LossConfig& config, double w_scale, double b_shift);

// Differentiable version: builds centroids, similarities, logits and the
// weighted BCE on the tape. Embedding rows are grouped by phrase
// (enroll_per_phrase rows per phrase in enroll, test_per_phrase in test).
template <typename T>
ad::Value ge2e_loss_tape(ad::Tape<T>& tape, ad::Value enroll_embeddings,
                         ad::Value test_embeddings, size_t num_phrases, size_t enroll_per_phrase,
                         size_t test_per_phrase, const LossConfig& config, ad::Value w_scale,
                         ad::Value b_shift);

// The label matrix used by the tape loss: (num_phrases*test_per_phrase) x
// num_phrases with a single 1 per row. Exposed for tests.
template <typename T>
Matrix<T> pair_labels(size_t num_phrases, size_t test_per_phrase);

}  // namespace kws::loss
