#include "kws/autodiff/tape.h"

#include <cmath>
#include <string>

#include "kws/common/errors.h"
#include "kws/kernels/kernels.h"

namespace kws::ad {

namespace k = kws::kernels;

template <typename T>
Value Tape<T>::push(Node n) {
  const int32_t id = static_cast<int32_t>(nodes_.size());
  Value v{id, static_cast<uint32_t>(n.data.rows()), static_cast<uint32_t>(n.data.cols())};
  nodes_.push_back(std::move(n));
  return v;
}

template <typename T>
typename Tape<T>::Node& Tape<T>::node(Value v) {
  if (!v.valid() || v.id >= static_cast<int32_t>(nodes_.size()))
    throw Error("tape: value does not belong to this tape");
  return nodes_[v.id];
}

template <typename T>
const typename Tape<T>::Node& Tape<T>::node(Value v) const {
  if (!v.valid() || v.id >= static_cast<int32_t>(nodes_.size()))
    throw Error("tape: value does not belong to this tape");
  return nodes_[v.id];
}

template <typename T>
void Tape<T>::check_output(const Matrix<T>& m, const char* op) const {
  const bool is_scalar = m.rows() == 1 && m.cols() == 1;
  if ((finite_checks_ || is_scalar) && !m.all_finite())
    throw NonFiniteError(std::string(op) + " produced a non-finite value");
}

template <typename T>
const Matrix<T>& Tape<T>::data(Value v) const {
  return node(v).data;
}

template <typename T>
const Matrix<T>& Tape<T>::grad(Value v) const {
  const Node& n = node(v);
  return n.grad.empty() ? empty_ : n.grad;
}

template <typename T>
T Tape<T>::scalar(Value v) const {
  const Node& n = node(v);
  if (n.data.rows() != 1 || n.data.cols() != 1)
    throw NotScalarError("value is " + n.data.shape_str() + ", not 1x1");
  return n.data.at(0, 0);
}

template <typename T>
Matrix<T>& Tape<T>::grad_buffer(int32_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Matrix<T>(n.data.rows(), n.data.cols());
  return n.grad;
}

template <typename T>
void Tape<T>::accumulate(int32_t id, const Matrix<T>& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  Matrix<T>& buf = grad_buffer(id);
  k::axpy(T(1), g.data(), buf.data(), buf.size());
}

// ---------------------------------------------------------------- forward

template <typename T>
Value Tape<T>::leaf(Matrix<T> data, bool requires_grad) {
  if (data.empty()) throw ShapeMismatchError("leaf: empty matrix");
  Node n;
  n.op = Op::kLeaf;
  n.data = std::move(data);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

template <typename T>
Value Tape<T>::matmul(Value a, Value b, bool trans_a, bool trans_b) {
  if (trans_a && trans_b) throw ShapeMismatchError("matmul: both sides transposed unsupported");
  const Node& na = node(a);
  const Node& nb = node(b);
  const size_t m = trans_a ? na.data.cols() : na.data.rows();
  const size_t kk = trans_a ? na.data.rows() : na.data.cols();
  const size_t kb = trans_b ? nb.data.cols() : nb.data.rows();
  const size_t nn = trans_b ? nb.data.rows() : nb.data.cols();
  if (kk != kb)
    throw ShapeMismatchError("matmul: inner dims disagree: " + na.data.shape_str() + " vs " +
                             nb.data.shape_str());
  Node n;
  n.op = Op::kMatmul;
  n.a = a.id;
  n.b = b.id;
  n.trans_a = trans_a;
  n.trans_b = trans_b;
  n.data = Matrix<T>(m, nn);
  k::gemm(trans_a, trans_b, m, nn, kk, T(1), na.data.data(), nb.data.data(), n.data.data(), false);
  n.requires_grad = na.requires_grad || nb.requires_grad;
  check_output(n.data, "matmul");
  return push(std::move(n));
}

template <typename T>
Value Tape<T>::add(Value a, Value b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (!na.data.same_shape(nb.data))
    throw ShapeMismatchError("add: " + na.data.shape_str() + " vs " + nb.data.shape_str());
  Node n;
  n.op = Op::kAdd;
  n.a = a.id;
  n.b = b.id;
  n.data = Matrix<T>(na.data.rows(), na.data.cols());
  k::add(na.data.data(), nb.data.data(), n.data.data(), n.data.size());
  n.requires_grad = na.requires_grad || nb.requires_grad;
  check_output(n.data, "add");
  return push(std::move(n));
}

template <typename T>
Value Tape<T>::add_rowvec(Value a, Value bias) {
  const Node& na = node(a);
  const Node& nb = node(bias);
  if (nb.data.rows() != 1 || nb.data.cols() != na.data.cols())
    throw ShapeMismatchError("add_rowvec: bias " + nb.data.shape_str() + " does not broadcast to " +
                             na.data.shape_str());
  Node n;
  n.op = Op::kAddRowvec;
  n.a = a.id;
  n.b = bias.id;
  n.data = Matrix<T>(na.data.rows(), na.data.cols());
  for (size_t r = 0; r < na.data.rows(); ++r)
    k::add(na.data.row(r), nb.data.data(), n.data.row(r), na.data.cols());
  n.requires_grad = na.requires_grad || nb.requires_grad;
  check_output(n.data, "add_rowvec");
  return push(std::move(n));
}

template <typename T>
Value Tape<T>::mul(Value a, Value b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (!na.data.same_shape(nb.data))
    throw ShapeMismatchError("mul: " + na.data.shape_str() + " vs " + nb.data.shape_str());
  Node n;
  n.op = Op::kMul;
  n.a = a.id;
  n.b = b.id;
  n.data = Matrix<T>(na.data.rows(), na.data.cols());
  k::mul(na.data.data(), nb.data.data(), n.data.data(), n.data.size());
  n.requires_grad = na.requires_grad || nb.requires_grad;
  check_output(n.data, "mul");
  return push(std::move(n));
}

template <typename T>
Value Tape<T>::scale(Value a, T c) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kScale;
  n.a = a.id;
  n.s0 = c;
  n.data = na.data;
  k::scale(c, n.data.data(), n.data.size());
  n.requires_grad = na.requires_grad;
  check_output(n.data, "scale");
  return push(std::move(n));
}

template <typename T>
Value Tape<T>::sigmoid(Value a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kSigmoid;
  n.a = a.id;
  n.data = Matrix<T>(na.data.rows(), na.data.cols());
  k::sigmoid(na.data.data(), n.data.data(), n.data.size());
  n.requires_grad = na.requires_grad;
  check_output(n.data, "sigmoid");
  return push(std::move(n));
}

template <typename T>
Value Tape<T>::tanh(Value a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kTanh;
  n.a = a.id;
  n.data = Matrix<T>(na.data.rows(), na.data.cols());
  k::tanh(na.data.data(), n.data.data(), n.data.size());
  n.requires_grad = na.requires_grad;
  check_output(n.data, "tanh");
  return push(std::move(n));
}

template <typename T>
Value Tape<T>::concat_cols(Value a, Value b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.data.rows() != nb.data.rows())
    throw ShapeMismatchError("concat_cols: row counts differ: " + na.data.shape_str() + " vs " +
                             nb.data.shape_str());
  Node n;
  n.op = Op::kConcatCols;
  n.a = a.id;
  n.b = b.id;
  n.col_begin = na.data.cols();  // split point, used by the adjoint
  n.data = Matrix<T>(na.data.rows(), na.data.cols() + nb.data.cols());
  for (size_t r = 0; r < na.data.rows(); ++r) {
    T* dst = n.data.row(r);
    const T* sa = na.data.row(r);
    const T* sb = nb.data.row(r);
    for (size_t j = 0; j < na.data.cols(); ++j) dst[j] = sa[j];
    for (size_t j = 0; j < nb.data.cols(); ++j) dst[na.data.cols() + j] = sb[j];
  }
  n.requires_grad = na.requires_grad || nb.requires_grad;
  check_output(n.data, "concat_cols");
  return push(std::move(n));
}

template <typename T>
Value Tape<T>::slice_cols(Value a, size_t col_begin, size_t col_end) {
  const Node& na = node(a);
  if (col_begin >= col_end || col_end > na.data.cols())
    throw ShapeMismatchError("slice_cols: range [" + std::to_string(col_begin) + ", " +
                             std::to_string(col_end) + ") out of " + na.data.shape_str());
  Node n;
  n.op = Op::kSliceCols;
  n.a = a.id;
  n.col_begin = col_begin;
  n.col_end = col_end;
  n.data = Matrix<T>(na.data.rows(), col_end - col_begin);
  for (size_t r = 0; r < na.data.rows(); ++r) {
    const T* src = na.data.row(r) + col_begin;
    T* dst = n.data.row(r);
    for (size_t j = 0; j < n.data.cols(); ++j) dst[j] = src[j];
  }
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

template <typename T>
Value Tape<T>::reduce_sum(Value a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kReduceSum;
  n.a = a.id;
  n.data = Matrix<T>(1, 1);
  n.data.at(0, 0) = k::sum(na.data.data(), na.data.size());
  n.requires_grad = na.requires_grad;
  check_output(n.data, "reduce_sum");
  return push(std::move(n));
}

template <typename T>
Value Tape<T>::reduce_mean(Value a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kReduceMean;
  n.a = a.id;
  n.data = Matrix<T>(1, 1);
  n.data.at(0, 0) = k::sum(na.data.data(), na.data.size()) / static_cast<T>(na.data.size());
  n.requires_grad = na.requires_grad;
  check_output(n.data, "reduce_mean");
  return push(std::move(n));
}

template <typename T>
Value Tape<T>::l2_normalize_rows(Value a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kL2NormRows;
  n.a = a.id;
  n.data = Matrix<T>(na.data.rows(), na.data.cols());
  n.aux = Matrix<T>(na.data.rows(), 1);
  for (size_t r = 0; r < na.data.rows(); ++r) {
    const T norm = std::sqrt(k::sumsq(na.data.row(r), na.data.cols()));
    if (!(norm >= T(1e-8)))
      throw DegenerateCentroidError("l2_normalize_rows: row " + std::to_string(r) +
                                    " has norm below 1e-8");
    n.aux.at(r, 0) = norm;
    const T inv = T(1) / norm;
    for (size_t j = 0; j < na.data.cols(); ++j) n.data.at(r, j) = na.data.at(r, j) * inv;
  }
  n.requires_grad = na.requires_grad;
  check_output(n.data, "l2_normalize_rows");
  return push(std::move(n));
}

template <typename T>
Value Tape<T>::scalar_affine(Value x, Value w, Value b) {
  const Node& nx = node(x);
  const Node& nw = node(w);
  const Node& nb = node(b);
  if (nw.data.rows() != 1 || nw.data.cols() != 1 || nb.data.rows() != 1 || nb.data.cols() != 1)
    throw ShapeMismatchError("scalar_affine: w and b must be 1x1");
  Node n;
  n.op = Op::kScalarAffine;
  n.a = x.id;
  n.b = w.id;
  n.c = b.id;
  const T wv = nw.data.at(0, 0);
  const T bv = nb.data.at(0, 0);
  n.data = Matrix<T>(nx.data.rows(), nx.data.cols());
  for (size_t i = 0; i < nx.data.size(); ++i) n.data.data()[i] = wv * nx.data.data()[i] + bv;
  n.requires_grad = nx.requires_grad || nw.requires_grad || nb.requires_grad;
  check_output(n.data, "scalar_affine");
  return push(std::move(n));
}

template <typename T>
Value Tape<T>::weighted_bce_with_logits(Value logits, Matrix<T> labels, T pos_weight,
                                        T neg_weight) {
  const Node& nl = node(logits);
  if (!nl.data.same_shape(labels))
    throw ShapeMismatchError("weighted_bce: labels " + labels.shape_str() + " vs logits " +
                             nl.data.shape_str());
  size_t n_pos = 0;
  for (size_t i = 0; i < labels.size(); ++i) n_pos += labels.data()[i] > T(0.5) ? 1 : 0;
  const size_t n_neg = labels.size() - n_pos;
  const T norm = pos_weight * static_cast<T>(n_pos) + neg_weight * static_cast<T>(n_neg);
  if (!(norm > T(0))) throw NumericError("weighted_bce: total weight is not positive");

  Node n;
  n.op = Op::kWeightedBce;
  n.a = logits.id;
  n.s0 = pos_weight;
  n.s1 = neg_weight;
  n.s2 = norm;
  T acc = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const T l = nl.data.data()[i];
    const T y = labels.data()[i];
    const T w = y > T(0.5) ? pos_weight : neg_weight;
    // max(l,0) - l*y + log(1 + exp(-|l|))
    const T bce = std::max(l, T(0)) - l * y + std::log1p(std::exp(-std::abs(l)));
    acc += w * bce;
  }
  n.aux = std::move(labels);
  n.data = Matrix<T>(1, 1);
  n.data.at(0, 0) = acc / norm;
  n.requires_grad = nl.requires_grad;
  check_output(n.data, "weighted_bce_with_logits");
  return push(std::move(n));
}

template <typename T>
Value Tape<T>::lerp_rows(Value a, Value b, std::vector<uint8_t> take_a) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (!na.data.same_shape(nb.data))
    throw ShapeMismatchError("lerp_rows: " + na.data.shape_str() + " vs " + nb.data.shape_str());
  if (take_a.size() != na.data.rows())
    throw ShapeMismatchError("lerp_rows: mask length " + std::to_string(take_a.size()) +
                             " != rows " + std::to_string(na.data.rows()));
  Node n;
  n.op = Op::kLerpRows;
  n.a = a.id;
  n.b = b.id;
  n.data = Matrix<T>(na.data.rows(), na.data.cols());
  for (size_t r = 0; r < na.data.rows(); ++r) {
    const T* src = take_a[r] ? na.data.row(r) : nb.data.row(r);
    T* dst = n.data.row(r);
    for (size_t j = 0; j < na.data.cols(); ++j) dst[j] = src[j];
  }
  n.mask = std::move(take_a);
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

// ---------------------------------------------------------------- backward

template <typename T>
void Tape<T>::backward(Value loss) {
  if (nodes_.empty()) throw Error("backward: empty tape");
  Node& ln = node(loss);
  if (ln.data.rows() != 1 || ln.data.cols() != 1)
    throw NotScalarError("backward: loss is " + ln.data.shape_str() + ", not 1x1");
  if (!ln.data.all_finite()) throw NonFiniteError("backward: loss is not finite");

  ln.grad = Matrix<T>(1, 1, T(1));

  for (int32_t i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad.empty() || !n.requires_grad) continue;
    const Matrix<T>& g = n.grad;
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatmul: {
        const Matrix<T>& a = nodes_[n.a].data;
        const Matrix<T>& b = nodes_[n.b].data;
        const size_t m = g.rows(), nn = g.cols();
        if (!n.trans_a && !n.trans_b) {
          const size_t kk = a.cols();
          if (nodes_[n.a].requires_grad)
            k::gemm(false, true, m, kk, nn, T(1), g.data(), b.data(), grad_buffer(n.a).data(), true);
          if (nodes_[n.b].requires_grad)
            k::gemm(true, false, kk, nn, m, T(1), a.data(), g.data(), grad_buffer(n.b).data(), true);
        } else if (!n.trans_a && n.trans_b) {
          const size_t kk = a.cols();
          if (nodes_[n.a].requires_grad)
            k::gemm(false, false, m, kk, nn, T(1), g.data(), b.data(), grad_buffer(n.a).data(), true);
          if (nodes_[n.b].requires_grad)
            k::gemm(true, false, nn, kk, m, T(1), g.data(), a.data(), grad_buffer(n.b).data(), true);
        } else {
          const size_t kk = a.rows();
          if (nodes_[n.a].requires_grad)
            k::gemm(false, true, kk, m, nn, T(1), b.data(), g.data(), grad_buffer(n.a).data(), true);
          if (nodes_[n.b].requires_grad)
            k::gemm(false, false, kk, nn, m, T(1), a.data(), g.data(), grad_buffer(n.b).data(), true);
        }
        break;
      }
      case Op::kAdd:
        accumulate(n.a, g);
        accumulate(n.b, g);
        break;
      case Op::kAddRowvec: {
        accumulate(n.a, g);
        if (nodes_[n.b].requires_grad) {
          Matrix<T>& gb = grad_buffer(n.b);
          for (size_t r = 0; r < g.rows(); ++r) k::axpy(T(1), g.row(r), gb.data(), g.cols());
        }
        break;
      }
      case Op::kMul: {
        if (nodes_[n.a].requires_grad) {
          Matrix<T>& ga = grad_buffer(n.a);
          const Matrix<T>& b = nodes_[n.b].data;
          for (size_t idx = 0; idx < g.size(); ++idx)
            ga.data()[idx] += g.data()[idx] * b.data()[idx];
        }
        if (nodes_[n.b].requires_grad) {
          Matrix<T>& gb = grad_buffer(n.b);
          const Matrix<T>& a = nodes_[n.a].data;
          for (size_t idx = 0; idx < g.size(); ++idx)
            gb.data()[idx] += g.data()[idx] * a.data()[idx];
        }
        break;
      }
      case Op::kScale:
        if (nodes_[n.a].requires_grad)
          k::axpy(n.s0, g.data(), grad_buffer(n.a).data(), g.size());
        break;
      case Op::kSigmoid:
        if (nodes_[n.a].requires_grad) {
          Matrix<T>& ga = grad_buffer(n.a);
          const T* y = n.data.data();
          for (size_t idx = 0; idx < g.size(); ++idx)
            ga.data()[idx] += g.data()[idx] * y[idx] * (T(1) - y[idx]);
        }
        break;
      case Op::kTanh:
        if (nodes_[n.a].requires_grad) {
          Matrix<T>& ga = grad_buffer(n.a);
          const T* y = n.data.data();
          for (size_t idx = 0; idx < g.size(); ++idx)
            ga.data()[idx] += g.data()[idx] * (T(1) - y[idx] * y[idx]);
        }
        break;
      case Op::kConcatCols: {
        const size_t split = n.col_begin;
        if (nodes_[n.a].requires_grad) {
          Matrix<T>& ga = grad_buffer(n.a);
          for (size_t r = 0; r < g.rows(); ++r) k::axpy(T(1), g.row(r), ga.row(r), split);
        }
        if (nodes_[n.b].requires_grad) {
          Matrix<T>& gb = grad_buffer(n.b);
          for (size_t r = 0; r < g.rows(); ++r)
            k::axpy(T(1), g.row(r) + split, gb.row(r), g.cols() - split);
        }
        break;
      }
      case Op::kSliceCols:
        if (nodes_[n.a].requires_grad) {
          Matrix<T>& ga = grad_buffer(n.a);
          for (size_t r = 0; r < g.rows(); ++r)
            k::axpy(T(1), g.row(r), ga.row(r) + n.col_begin, g.cols());
        }
        break;
      case Op::kReduceSum:
        if (nodes_[n.a].requires_grad) {
          Matrix<T>& ga = grad_buffer(n.a);
          const T gv = g.at(0, 0);
          for (size_t idx = 0; idx < ga.size(); ++idx) ga.data()[idx] += gv;
        }
        break;
      case Op::kReduceMean:
        if (nodes_[n.a].requires_grad) {
          Matrix<T>& ga = grad_buffer(n.a);
          const T gv = g.at(0, 0) / static_cast<T>(ga.size());
          for (size_t idx = 0; idx < ga.size(); ++idx) ga.data()[idx] += gv;
        }
        break;
      case Op::kL2NormRows:
        if (nodes_[n.a].requires_grad) {
          Matrix<T>& ga = grad_buffer(n.a);
          for (size_t r = 0; r < g.rows(); ++r) {
            const T* y = n.data.row(r);
            const T* gr = g.row(r);
            const T inv = T(1) / n.aux.at(r, 0);
            const T gy = k::dot(gr, y, g.cols());
            T* dst = ga.row(r);
            for (size_t j = 0; j < g.cols(); ++j) dst[j] += (gr[j] - y[j] * gy) * inv;
          }
        }
        break;
      case Op::kScalarAffine: {
        const Matrix<T>& x = nodes_[n.a].data;
        const T wv = nodes_[n.b].data.at(0, 0);
        if (nodes_[n.a].requires_grad)
          k::axpy(wv, g.data(), grad_buffer(n.a).data(), g.size());
        if (nodes_[n.b].requires_grad)
          grad_buffer(n.b).at(0, 0) += k::dot(g.data(), x.data(), g.size());
        if (nodes_[n.c].requires_grad)
          grad_buffer(n.c).at(0, 0) += k::sum(g.data(), g.size());
        break;
      }
      case Op::kWeightedBce:
        if (nodes_[n.a].requires_grad) {
          Matrix<T>& ga = grad_buffer(n.a);
          const Matrix<T>& l = nodes_[n.a].data;
          const T gv = g.at(0, 0) / n.s2;
          for (size_t idx = 0; idx < ga.size(); ++idx) {
            const T y = n.aux.data()[idx];
            const T w = y > T(0.5) ? n.s0 : n.s1;
            const T sig = T(1) / (T(1) + std::exp(-l.data()[idx]));
            ga.data()[idx] += gv * w * (sig - y);
          }
        }
        break;
      case Op::kLerpRows: {
        const bool need_a = nodes_[n.a].requires_grad;
        const bool need_b = nodes_[n.b].requires_grad;
        Matrix<T>* ga = need_a ? &grad_buffer(n.a) : nullptr;
        Matrix<T>* gb = need_b ? &grad_buffer(n.b) : nullptr;
        for (size_t r = 0; r < g.rows(); ++r) {
          if (n.mask[r]) {
            if (ga) k::axpy(T(1), g.row(r), ga->row(r), g.cols());
          } else {
            if (gb) k::axpy(T(1), g.row(r), gb->row(r), g.cols());
          }
        }
        break;
      }
    }
    // Intermediate results are dead once their adjoint has run; release the
    // memory so peak usage stays near the forward pass.
    if (n.op != Op::kLeaf) {
      n.data = Matrix<T>();
      n.grad = Matrix<T>();
      n.aux = Matrix<T>();
    }
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace kws::ad
