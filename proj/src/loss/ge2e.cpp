#include "kws/loss/ge2e.h"

#include <cmath>

#include "kws/common/errors.h"
#include "kws/kernels/kernels.h"

namespace kws::loss {

namespace k = kws::kernels;

void LossConfig::validate() const {
  if (!(gamma > 0.0)) throw UsageError("loss config: gamma must be positive");
  if (!(w_scale_init > 0.0)) throw UsageError("loss config: w_scale must be positive");
}

template <typename T>
Matrix<T> centroids(const Matrix<T>& embeddings, size_t per_group) {
  if (per_group == 0 || embeddings.rows() % per_group != 0)
    throw ShapeMismatchError("centroids: " + std::to_string(embeddings.rows()) +
                             " rows not divisible into groups of " + std::to_string(per_group));
  const size_t groups = embeddings.rows() / per_group;
  Matrix<T> out(groups, embeddings.cols());
  for (size_t g = 0; g < groups; ++g) {
    T* dst = out.row(g);
    for (size_t r = 0; r < per_group; ++r)
      k::axpy(T(1), embeddings.row(g * per_group + r), dst, embeddings.cols());
    k::scale(T(1) / static_cast<T>(per_group), dst, embeddings.cols());
    const T norm = std::sqrt(k::sumsq(dst, embeddings.cols()));
    if (!(norm >= T(1e-8)))
      throw DegenerateCentroidError("centroid " + std::to_string(g) + " has norm below 1e-8");
    k::scale(T(1) / norm, dst, embeddings.cols());
  }
  return out;
}

template <typename T>
Matrix<T> similarity_matrix(const Matrix<T>& test_embeddings, const Matrix<T>& cents) {
  if (test_embeddings.cols() != cents.cols())
    throw ShapeMismatchError("similarity_matrix: dim " + std::to_string(test_embeddings.cols()) +
                             " vs " + std::to_string(cents.cols()));
  Matrix<T> s(test_embeddings.rows(), cents.rows());
  k::gemm(false, true, test_embeddings.rows(), cents.rows(), cents.cols(), T(1),
          test_embeddings.data(), cents.data(), s.data(), false);
  return s;
}

template <typename T>
LossResult ge2e_triplet_loss(const Matrix<T>& similarities, const std::vector<int>& labels,
                             const LossConfig& config, double w_scale, double b_shift) {
  config.validate();
  if (labels.size() != similarities.rows())
    throw ShapeMismatchError("ge2e_triplet_loss: " + std::to_string(labels.size()) +
                             " labels for " + std::to_string(similarities.rows()) + " rows");
  if (!similarities.all_finite()) throw NonFiniteError("ge2e_triplet_loss: non-finite similarity");

  double pos_sum = 0.0, neg_sum = 0.0;
  int64_t n_pos = 0, n_neg = 0;
  for (size_t i = 0; i < similarities.rows(); ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<size_t>(label) >= similarities.cols())
      throw ShapeMismatchError("ge2e_triplet_loss: label out of range");
    for (size_t j = 0; j < similarities.cols(); ++j) {
      const double l = w_scale * static_cast<double>(similarities.at(i, j)) + b_shift;
      const double y = static_cast<size_t>(label) == j ? 1.0 : 0.0;
      const double bce = std::max(l, 0.0) - l * y + std::log1p(std::exp(-std::fabs(l)));
      if (y > 0.5) {
        pos_sum += bce;
        ++n_pos;
      } else {
        neg_sum += bce;
        ++n_neg;
      }
    }
  }
  LossResult result;
  result.n_pos = n_pos;
  result.n_neg = n_neg;
  result.loss = (pos_sum + config.gamma * neg_sum) /
                (static_cast<double>(n_pos) + config.gamma * static_cast<double>(n_neg));
  return result;
}

template <typename T>
Matrix<T> pair_labels(size_t num_phrases, size_t test_per_phrase) {
  Matrix<T> labels(num_phrases * test_per_phrase, num_phrases);
  for (size_t i = 0; i < labels.rows(); ++i) labels.at(i, i / test_per_phrase) = T(1);
  return labels;
}

template <typename T>
ad::Value ge2e_loss_tape(ad::Tape<T>& tape, ad::Value enroll_embeddings,
                         ad::Value test_embeddings, size_t num_phrases, size_t enroll_per_phrase,
                         size_t test_per_phrase, const LossConfig& config, ad::Value w_scale,
                         ad::Value b_shift) {
  config.validate();
  if (enroll_embeddings.rows != num_phrases * enroll_per_phrase)
    throw ShapeMismatchError("ge2e_loss_tape: enrollment rows " +
                             std::to_string(enroll_embeddings.rows) + " != " +
                             std::to_string(num_phrases * enroll_per_phrase));
  if (test_embeddings.rows != num_phrases * test_per_phrase)
    throw ShapeMismatchError("ge2e_loss_tape: test rows " + std::to_string(test_embeddings.rows) +
                             " != " + std::to_string(num_phrases * test_per_phrase));

  // Group averaging as a constant matrix so the whole loss stays on the tape.
  Matrix<T> averager(num_phrases, num_phrases * enroll_per_phrase);
  const T inv = T(1) / static_cast<T>(enroll_per_phrase);
  for (size_t g = 0; g < num_phrases; ++g)
    for (size_t r = 0; r < enroll_per_phrase; ++r)
      averager.at(g, g * enroll_per_phrase + r) = inv;

  ad::Value cents =
      tape.l2_normalize_rows(tape.matmul(tape.leaf(std::move(averager)), enroll_embeddings));
  ad::Value sims = tape.matmul(test_embeddings, cents, false, true);
  ad::Value logits = tape.scalar_affine(sims, w_scale, b_shift);
  return tape.weighted_bce_with_logits(logits, pair_labels<T>(num_phrases, test_per_phrase),
                                       T(1), static_cast<T>(config.gamma));
}

template Matrix<float> centroids<float>(const Matrix<float>&, size_t);
template Matrix<double> centroids<double>(const Matrix<double>&, size_t);
template Matrix<float> similarity_matrix<float>(const Matrix<float>&, const Matrix<float>&);
template Matrix<double> similarity_matrix<double>(const Matrix<double>&, const Matrix<double>&);
template LossResult ge2e_triplet_loss<float>(const Matrix<float>&, const std::vector<int>&,
                                             const LossConfig&, double, double);
template LossResult ge2e_triplet_loss<double>(const Matrix<double>&, const std::vector<int>&,
                                              const LossConfig&, double, double);
template Matrix<float> pair_labels<float>(size_t, size_t);
template Matrix<double> pair_labels<double>(size_t, size_t);
template ad::Value ge2e_loss_tape<float>(ad::Tape<float>&, ad::Value, ad::Value, size_t, size_t,
                                         size_t, const LossConfig&, ad::Value, ad::Value);
template ad::Value ge2e_loss_tape<double>(ad::Tape<double>&, ad::Value, ad::Value, size_t, size_t,
                                          size_t, const LossConfig&, ad::Value, ad::Value);

}  // namespace kws::loss
