#include "kws/model/lstm.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "kws/common/errors.h"
#include "kws/common/rng.h"
#include "kws/kernels/kernels.h"

namespace kws::model {

namespace k = kws::kernels;

void ModelConfig::validate() const {
  if (input_dim <= 0 || num_layers <= 0 || hidden_dim <= 0 || embedding_dim <= 0)
    throw UsageError("model config dimensions must be positive");
}

template <typename T>
std::vector<Matrix<T>*> ModelParamsT<T>::tensors() {
  std::vector<Matrix<T>*> out;
  for (auto& l : layers) {
    out.push_back(&l.w);
    out.push_back(&l.u);
    out.push_back(&l.b);
  }
  out.push_back(&proj_w);
  out.push_back(&proj_b);
  out.push_back(&w_scale);
  out.push_back(&b_shift);
  return out;
}

template <typename T>
std::vector<const Matrix<T>*> ModelParamsT<T>::tensors() const {
  std::vector<const Matrix<T>*> out;
  for (const auto& l : layers) {
    out.push_back(&l.w);
    out.push_back(&l.u);
    out.push_back(&l.b);
  }
  out.push_back(&proj_w);
  out.push_back(&proj_b);
  out.push_back(&w_scale);
  out.push_back(&b_shift);
  return out;
}

template <typename T>
std::vector<std::string> ModelParamsT<T>::tensor_names() const {
  std::vector<std::string> out;
  for (size_t i = 0; i < layers.size(); ++i) {
    const std::string prefix = "layer" + std::to_string(i) + "/";
    out.push_back(prefix + "w");
    out.push_back(prefix + "u");
    out.push_back(prefix + "b");
  }
  out.push_back("proj/w");
  out.push_back("proj/b");
  out.push_back("loss/w_scale");
  out.push_back("loss/b_shift");
  return out;
}

namespace {

template <typename T>
Matrix<T> xavier_uniform(size_t rows, size_t cols, Rng& rng) {
  Matrix<T> m(rows, cols);
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (size_t i = 0; i < m.size(); ++i)
    m.data()[i] = static_cast<T>(rng.uniform(-bound, bound));
  return m;
}

}  // namespace

template <typename T>
ModelParamsT<T> init_params(const ModelConfig& config, uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const size_t h = static_cast<size_t>(config.hidden_dim);
  ModelParamsT<T> p;
  p.config = config;
  for (int l = 0; l < config.num_layers; ++l) {
    const size_t in = l == 0 ? static_cast<size_t>(config.input_dim) : h;
    LayerParamsT<T> layer;
    layer.w = xavier_uniform<T>(4 * h, in, rng);
    layer.u = xavier_uniform<T>(4 * h, h, rng);
    layer.b = Matrix<T>(1, 4 * h);
    // Forget-gate bias 1.0 so early training does not flush cell state.
    for (size_t j = h; j < 2 * h; ++j) layer.b.at(0, j) = T(1);
    p.layers.push_back(std::move(layer));
  }
  p.proj_w = xavier_uniform<T>(static_cast<size_t>(config.embedding_dim), h, rng);
  p.proj_b = Matrix<T>(1, config.embedding_dim);
  p.w_scale = Matrix<T>(1, 1, T(10));
  p.b_shift = Matrix<T>(1, 1, T(-5));
  return p;
}

int64_t count_params(const ModelConfig& config) {
  config.validate();
  const int64_t h = config.hidden_dim;
  const int64_t e = config.embedding_dim;
  int64_t total = 0;
  for (int l = 0; l < config.num_layers; ++l) {
    const int64_t in = l == 0 ? config.input_dim : h;
    total += 4 * h * (in + h + 1);
  }
  total += h * e + e;
  return total;
}

template <typename T>
void lstm_cell(const LayerParamsT<T>& layer, const Matrix<T>& x, const Matrix<T>& h_prev,
               const Matrix<T>& c_prev, Matrix<T>* h_t, Matrix<T>* c_t) {
  const size_t rows = x.rows();
  const size_t h4 = layer.w.rows();
  const size_t h = h4 / 4;
  if (layer.w.cols() != x.cols())
    throw ShapeMismatchError("lstm_cell: x " + x.shape_str() + " vs W " + layer.w.shape_str());
  if (h_prev.rows() != rows || h_prev.cols() != h || c_prev.rows() != rows || c_prev.cols() != h)
    throw ShapeMismatchError("lstm_cell: state shape mismatch");

  // gates = x W^T + h_prev U^T + b, packed [i f g o].
  Matrix<T> gates(rows, h4);
  k::gemm(false, true, rows, h4, x.cols(), T(1), x.data(), layer.w.data(), gates.data(), false);
  k::gemm(false, true, rows, h4, h, T(1), h_prev.data(), layer.u.data(), gates.data(), true);
  for (size_t r = 0; r < rows; ++r) k::add(gates.row(r), layer.b.data(), gates.row(r), h4);

  *h_t = Matrix<T>(rows, h);
  *c_t = Matrix<T>(rows, h);
  std::vector<T> buf(h4);
  for (size_t r = 0; r < rows; ++r) {
    T* g = gates.row(r);
    k::sigmoid(g, buf.data(), h);                  // i
    k::sigmoid(g + h, buf.data() + h, h);          // f
    k::tanh(g + 2 * h, buf.data() + 2 * h, h);     // g
    k::sigmoid(g + 3 * h, buf.data() + 3 * h, h);  // o
    const T* cp = c_prev.row(r);
    T* cn = c_t->row(r);
    T* hn = h_t->row(r);
    for (size_t j = 0; j < h; ++j) {
      cn[j] = buf[h + j] * cp[j] + buf[j] * buf[2 * h + j];
      hn[j] = buf[3 * h + j] * std::tanh(cn[j]);
    }
  }
}

template <typename T>
Matrix<T> embed_utterance(const Matrix<T>& features, const ModelParamsT<T>& params) {
  if (features.rows() == 0 || features.empty())
    throw EmptyInputError("embed_utterance: no frames");
  if (features.cols() != static_cast<size_t>(params.config.input_dim))
    throw ShapeMismatchError("embed_utterance: feature dim " + std::to_string(features.cols()) +
                             " vs model input " + std::to_string(params.config.input_dim));
  const size_t h = static_cast<size_t>(params.config.hidden_dim);
  const size_t num_layers = params.layers.size();

  std::vector<Matrix<T>> hs(num_layers, Matrix<T>(1, h));
  std::vector<Matrix<T>> cs(num_layers, Matrix<T>(1, h));
  Matrix<T> x(1, features.cols());
  Matrix<T> h_next, c_next;
  for (size_t t = 0; t < features.rows(); ++t) {
    for (size_t j = 0; j < features.cols(); ++j) x.at(0, j) = features.at(t, j);
    const Matrix<T>* input = &x;
    for (size_t l = 0; l < num_layers; ++l) {
      lstm_cell(params.layers[l], *input, hs[l], cs[l], &h_next, &c_next);
      hs[l] = std::move(h_next);
      cs[l] = std::move(c_next);
      input = &hs[l];
    }
  }

  const size_t e = static_cast<size_t>(params.config.embedding_dim);
  Matrix<T> emb(1, e);
  k::gemm(false, true, 1, e, h, T(1), hs[num_layers - 1].data(), params.proj_w.data(), emb.data(),
          false);
  k::add(emb.data(), params.proj_b.data(), emb.data(), e);
  const T norm = std::sqrt(k::sumsq(emb.data(), e));
  if (!(norm >= T(1e-8))) throw DegenerateCentroidError("embed_utterance: zero-norm embedding");
  k::scale(T(1) / norm, emb.data(), e);
  return emb;
}

// ---------------------------------------------------------------- tape path

template <typename T>
TapeParams<T> stage_params(ad::Tape<T>& tape, const ModelParamsT<T>& params) {
  TapeParams<T> staged;
  for (const auto& l : params.layers) {
    typename TapeParams<T>::Layer sl;
    sl.w = tape.leaf(l.w, true);
    sl.u = tape.leaf(l.u, true);
    sl.b = tape.leaf(l.b, true);
    staged.layers.push_back(sl);
  }
  staged.proj_w = tape.leaf(params.proj_w, true);
  staged.proj_b = tape.leaf(params.proj_b, true);
  staged.w_scale = tape.leaf(params.w_scale, true);
  staged.b_shift = tape.leaf(params.b_shift, true);
  return staged;
}

template <typename T>
std::vector<Matrix<T>> TapeParams<T>::collect_grads(const ad::Tape<T>& tape,
                                                    const ModelParamsT<T>& shapes) const {
  std::vector<ad::Value> staged_values;
  for (const auto& l : layers) {
    staged_values.push_back(l.w);
    staged_values.push_back(l.u);
    staged_values.push_back(l.b);
  }
  staged_values.push_back(proj_w);
  staged_values.push_back(proj_b);
  staged_values.push_back(w_scale);
  staged_values.push_back(b_shift);

  const auto shape_ptrs = shapes.tensors();
  std::vector<Matrix<T>> out;
  out.reserve(staged_values.size());
  for (size_t i = 0; i < staged_values.size(); ++i) {
    const Matrix<T>& g = tape.grad(staged_values[i]);
    out.push_back(g.empty() ? Matrix<T>(shape_ptrs[i]->rows(), shape_ptrs[i]->cols()) : g);
  }
  return out;
}

template <typename T>
ad::Value embed_batch_tape(ad::Tape<T>& tape, const TapeParams<T>& staged,
                           const ModelConfig& config,
                           const std::vector<const Matrix<T>*>& features) {
  if (features.empty()) throw EmptyInputError("embed_batch_tape: empty batch");
  const size_t rows = features.size();
  const size_t in_dim = static_cast<size_t>(config.input_dim);
  const size_t h = static_cast<size_t>(config.hidden_dim);
  size_t max_t = 0;
  for (const Matrix<T>* f : features) {
    if (f->rows() == 0) throw EmptyInputError("embed_batch_tape: utterance with no frames");
    if (f->cols() != in_dim)
      throw ShapeMismatchError("embed_batch_tape: feature dim " + std::to_string(f->cols()) +
                               " vs model input " + std::to_string(in_dim));
    max_t = std::max(max_t, f->rows());
  }

  std::vector<ad::Value> hs(config.num_layers), cs(config.num_layers);
  for (int l = 0; l < config.num_layers; ++l) {
    hs[l] = tape.leaf(Matrix<T>(rows, h), false);
    cs[l] = tape.leaf(Matrix<T>(rows, h), false);
  }

  for (size_t t = 0; t < max_t; ++t) {
    // Step input: each live row's frame t; finished rows contribute zeros
    // and are frozen below.
    Matrix<T> xt(rows, in_dim);
    std::vector<uint8_t> live(rows, 0);
    bool all_live = true;
    for (size_t r = 0; r < rows; ++r) {
      if (t < features[r]->rows()) {
        live[r] = 1;
        const T* src = features[r]->row(t);
        T* dst = xt.row(r);
        for (size_t j = 0; j < in_dim; ++j) dst[j] = src[j];
      } else {
        all_live = false;
      }
    }
    ad::Value input = tape.leaf(std::move(xt), false);

    for (int l = 0; l < config.num_layers; ++l) {
      const auto& lp = staged.layers[l];
      ad::Value gates = tape.add_rowvec(
          tape.add(tape.matmul(input, lp.w, false, true), tape.matmul(hs[l], lp.u, false, true)),
          lp.b);
      ad::Value gi = tape.sigmoid(tape.slice_cols(gates, 0, h));
      ad::Value gf = tape.sigmoid(tape.slice_cols(gates, h, 2 * h));
      ad::Value gg = tape.tanh(tape.slice_cols(gates, 2 * h, 3 * h));
      ad::Value go = tape.sigmoid(tape.slice_cols(gates, 3 * h, 4 * h));
      ad::Value c_new = tape.add(tape.mul(gf, cs[l]), tape.mul(gi, gg));
      ad::Value h_new = tape.mul(go, tape.tanh(c_new));
      if (all_live) {
        cs[l] = c_new;
        hs[l] = h_new;
      } else {
        cs[l] = tape.lerp_rows(c_new, cs[l], live);
        hs[l] = tape.lerp_rows(h_new, hs[l], live);
      }
      input = hs[l];
    }
  }

  ad::Value proj = tape.add_rowvec(tape.matmul(hs[config.num_layers - 1], staged.proj_w, false, true),
                                   staged.proj_b);
  return tape.l2_normalize_rows(proj);
}

template struct ModelParamsT<float>;
template struct ModelParamsT<double>;
template struct TapeParams<float>;
template struct TapeParams<double>;
template ModelParamsT<float> init_params<float>(const ModelConfig&, uint64_t);
template ModelParamsT<double> init_params<double>(const ModelConfig&, uint64_t);
template void lstm_cell<float>(const LayerParamsT<float>&, const Matrix<float>&,
                               const Matrix<float>&, const Matrix<float>&, Matrix<float>*,
                               Matrix<float>*);
template void lstm_cell<double>(const LayerParamsT<double>&, const Matrix<double>&,
                                const Matrix<double>&, const Matrix<double>&, Matrix<double>*,
                                Matrix<double>*);
template Matrix<float> embed_utterance<float>(const Matrix<float>&, const ModelParamsT<float>&);
template Matrix<double> embed_utterance<double>(const Matrix<double>&, const ModelParamsT<double>&);
template TapeParams<float> stage_params<float>(ad::Tape<float>&, const ModelParamsT<float>&);
template TapeParams<double> stage_params<double>(ad::Tape<double>&, const ModelParamsT<double>&);
template ad::Value embed_batch_tape<float>(ad::Tape<float>&, const TapeParams<float>&,
                                           const ModelConfig&,
                                           const std::vector<const Matrix<float>*>&);
template ad::Value embed_batch_tape<double>(ad::Tape<double>&, const TapeParams<double>&,
                                            const ModelConfig&,
                                            const std::vector<const Matrix<double>*>&);

}  // namespace kws::model
