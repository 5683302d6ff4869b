// Utterance embedding network: stacked LSTM layers over log-mel frames, a
// linear projection of the final frame's top hidden state, then row L2
// normalization so cosine similarity is a plain dot product.
//
// Gate packing order in the 4h dimension is [input, forget, cell, output].
#pragma once

#include <cstdint>
#include <vector>

#include "kws/autodiff/tape.h"
#include "kws/common/matrix.h"
#include "kws/dsp/features.h"

namespace kws::model {

struct ModelConfig {
  int input_dim = 40;
  int num_layers = 3;
  int hidden_dim = 384;
  int embedding_dim = 128;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

template <typename T>
struct LayerParamsT {
  Matrix<T> w;  // 4h x in
  Matrix<T> u;  // 4h x h
  Matrix<T> b;  // 1 x 4h
};

template <typename T>
struct ModelParamsT {
  ModelConfig config;
  std::vector<LayerParamsT<T>> layers;
  Matrix<T> proj_w;   // embedding_dim x hidden_dim
  Matrix<T> proj_b;   // 1 x embedding_dim
  Matrix<T> w_scale;  // 1x1 similarity scale, kept positive
  Matrix<T> b_shift;  // 1x1 similarity offset

  std::vector<Matrix<T>*> tensors();
  std::vector<const Matrix<T>*> tensors() const;
  // "layer0/w", ..., "proj/w", "proj/b", "loss/w_scale", "loss/b_shift"
  std::vector<std::string> tensor_names() const;

  template <typename U>
  ModelParamsT<U> cast() const {
    ModelParamsT<U> out;
    out.config = config;
    for (const auto& l : layers)
      out.layers.push_back({l.w.template cast<U>(), l.u.template cast<U>(), l.b.template cast<U>()});
    out.proj_w = proj_w.template cast<U>();
    out.proj_b = proj_b.template cast<U>();
    out.w_scale = w_scale.template cast<U>();
    out.b_shift = b_shift.template cast<U>();
    return out;
  }
};

using ModelParams = ModelParamsT<float>;

// Xavier-uniform weights, zero biases except the forget gate (1.0),
// w_scale = 10, b_shift = -5. Same seed, same parameters.
template <typename T>
ModelParamsT<T> init_params(const ModelConfig& config, uint64_t seed);

// Encoder parameter count: sum over layers of 4h*(in + h + 1), plus the
// projection h*e + e. Loss-head scalars are not counted.
int64_t count_params(const ModelConfig& config);

// One LSTM step for a batch of row vectors.
// x: R x in, h_prev/c_prev: R x h; writes h_t/c_t (R x h).
template <typename T>
void lstm_cell(const LayerParamsT<T>& layer, const Matrix<T>& x, const Matrix<T>& h_prev,
               const Matrix<T>& c_prev, Matrix<T>* h_t, Matrix<T>* c_t);

// Inference-path embedding of a single utterance; returns a unit-norm
// 1 x embedding_dim row. Zero initial state, frames processed left to right.
template <typename T>
Matrix<T> embed_utterance(const Matrix<T>& features, const ModelParamsT<T>& params);

inline MatF embed_utterance(const dsp::FeatureMatrix& features, const ModelParams& params) {
  return embed_utterance<float>(features.frames, params);
}

// --- training-path forward (records onto a tape) -------------------------

template <typename T>
struct TapeParams {
  struct Layer {
    ad::Value w, u, b;
  };
  std::vector<Layer> layers;
  ad::Value proj_w, proj_b, w_scale, b_shift;

  // Gradients in tensors() order; zero matrices where no gradient flowed.
  std::vector<Matrix<T>> collect_grads(const ad::Tape<T>& tape,
                                       const ModelParamsT<T>& shapes) const;
};

template <typename T>
TapeParams<T> stage_params(ad::Tape<T>& tape, const ModelParamsT<T>& params);

// Lockstep batched forward over utterances of varying length: rows advance
// together, and a row's state freezes once its utterance ends, so after the
// longest utterance every row holds its own final hidden state. Returns the
// batch embedding matrix (one unit row per utterance).
template <typename T>
ad::Value embed_batch_tape(ad::Tape<T>& tape, const TapeParams<T>& staged,
                           const ModelConfig& config,
                           const std::vector<const Matrix<T>*>& features);

}  // namespace kws::model
