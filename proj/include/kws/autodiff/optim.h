// Adam with bias correction, plus global-norm gradient clipping.
#pragma once

#include <cstdint>
#include <vector>

#include "kws/common/matrix.h"

namespace kws::ad {

template <typename T>
struct AdamConfig {
  T lr = T(1e-3);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);
};

template <typename T>
struct AdamState {
  std::vector<Matrix<T>> m;
  std::vector<Matrix<T>> v;
  int64_t step = 0;

  // Lazily shaped from the first update's parameter list.
  bool initialized() const { return !m.empty(); }
};

// One update over a parameter group; params[i] and grads[i] must agree in
// shape across calls.
template <typename T>
void adam_step(const std::vector<Matrix<T>*>& params, const std::vector<const Matrix<T>*>& grads,
               AdamState<T>& state, const AdamConfig<T>& config);

// Scales all gradients by max_norm / ||g|| when the global L2 norm exceeds
// max_norm. Returns the pre-clip norm.
template <typename T>
T clip_global_norm(const std::vector<Matrix<T>*>& grads, T max_norm);

}  // namespace kws::ad
