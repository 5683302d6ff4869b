// Reverse-mode automatic differentiation over dense matrices. A Tape records
// each operation's forward result and provenance; backward() replays it in
// reverse, accumulating adjoints. Float instantiation is used for training,
// double for gradient checking.
//
// A tape is single-use and single-threaded: build the step's graph, read the
// loss, call backward(), harvest leaf gradients, then discard the tape.
// backward() frees intermediate results as it consumes them, so only leaf
// data and leaf gradients remain valid afterwards.
#pragma once

#include <cstdint>
#include <vector>

#include "kws/common/matrix.h"

namespace kws::ad {

struct Value {
  int32_t id = -1;
  uint32_t rows = 0;
  uint32_t cols = 0;

  bool valid() const { return id >= 0; }
};

template <typename T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves: inputs and parameters. Gradients are only tracked for leaves
  // created with requires_grad and for values computed from them.
  Value leaf(Matrix<T> data, bool requires_grad = false);

  // C = op(a) * op(b); transposing both sides is unsupported.
  Value matmul(Value a, Value b, bool trans_a = false, bool trans_b = false);
  Value add(Value a, Value b);
  // a (R x C) + bias (1 x C) broadcast over rows.
  Value add_rowvec(Value a, Value bias);
  Value mul(Value a, Value b);  // elementwise
  Value scale(Value a, T c);
  Value sigmoid(Value a);
  Value tanh(Value a);
  Value concat_cols(Value a, Value b);
  Value slice_cols(Value a, size_t col_begin, size_t col_end);
  Value reduce_sum(Value a);
  Value reduce_mean(Value a);
  // Rows rescaled to unit L2 norm; rows with norm < 1e-8 are an error.
  Value l2_normalize_rows(Value a);
  // w * x + b with scalar (1x1) values w and b.
  Value scalar_affine(Value x, Value w, Value b);
  // Mean of per-entry binary cross-entropy against constant {0,1} labels,
  // weighted pos_weight / neg_weight and normalized by the total weight
  // pos_weight * n_pos + neg_weight * n_neg. Numerically stable in the
  // logits. Returns a scalar.
  Value weighted_bce_with_logits(Value logits, Matrix<T> labels, T pos_weight, T neg_weight);
  // Row-wise select: out row i = take_a[i] ? a row i : b row i.
  Value lerp_rows(Value a, Value b, std::vector<uint8_t> take_a);

  void backward(Value loss);

  const Matrix<T>& data(Value v) const;
  // Zero-shaped matrix if no gradient reached v.
  const Matrix<T>& grad(Value v) const;
  T scalar(Value v) const;

  size_t num_nodes() const { return nodes_.size(); }

  // When enabled every op output is scanned for NaN/Inf (slow; meant for
  // tests). Scalar outputs (losses) are always checked.
  void set_finite_checks(bool on) { finite_checks_ = on; }

 private:
  enum class Op : uint8_t {
    kLeaf,
    kMatmul,
    kAdd,
    kAddRowvec,
    kMul,
    kScale,
    kSigmoid,
    kTanh,
    kConcatCols,
    kSliceCols,
    kReduceSum,
    kReduceMean,
    kL2NormRows,
    kScalarAffine,
    kWeightedBce,
    kLerpRows,
  };

  struct Node {
    Op op = Op::kLeaf;
    int32_t a = -1, b = -1, c = -1;
    bool trans_a = false, trans_b = false;
    size_t col_begin = 0, col_end = 0;
    T s0 = 0, s1 = 0, s2 = 0;
    Matrix<T> data;
    Matrix<T> grad;
    Matrix<T> aux;  // labels for bce, row norms for l2norm
    std::vector<uint8_t> mask;
    bool requires_grad = false;
  };

  Value push(Node node);
  Node& node(Value v);
  const Node& node(Value v) const;
  void accumulate(int32_t id, const Matrix<T>& g);
  Matrix<T>& grad_buffer(int32_t id);
  void check_output(const Matrix<T>& m, const char* op) const;

  std::vector<Node> nodes_;
  bool finite_checks_ = false;
  Matrix<T> empty_;
};

using TapeF = Tape<float>;
using TapeD = Tape<double>;

}  // namespace kws::ad
