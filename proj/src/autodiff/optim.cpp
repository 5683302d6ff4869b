#include "kws/autodiff/optim.h"

#include <cmath>

#include "kws/common/errors.h"
#include "kws/kernels/kernels.h"

namespace kws::ad {

template <typename T>
void adam_step(const std::vector<Matrix<T>*>& params, const std::vector<const Matrix<T>*>& grads,
               AdamState<T>& state, const AdamConfig<T>& config) {
  if (params.size() != grads.size())
    throw ShapeMismatchError("adam_step: " + std::to_string(params.size()) + " params vs " +
                             std::to_string(grads.size()) + " grads");
  if (!state.initialized()) {
    state.m.reserve(params.size());
    state.v.reserve(params.size());
    for (const Matrix<T>* p : params) {
      state.m.emplace_back(p->rows(), p->cols());
      state.v.emplace_back(p->rows(), p->cols());
    }
  }
  if (state.m.size() != params.size())
    throw ShapeMismatchError("adam_step: state tracks a different parameter group");

  state.step += 1;
  const T b1 = config.beta1;
  const T b2 = config.beta2;
  const T bias1 = T(1) - std::pow(b1, static_cast<T>(state.step));
  const T bias2 = T(1) - std::pow(b2, static_cast<T>(state.step));

  for (size_t t = 0; t < params.size(); ++t) {
    Matrix<T>& p = *params[t];
    const Matrix<T>& g = *grads[t];
    if (!p.same_shape(g) || !p.same_shape(state.m[t]))
      throw ShapeMismatchError("adam_step: param " + std::to_string(t) + " shape mismatch: " +
                               p.shape_str() + " vs grad " + g.shape_str());
    T* m = state.m[t].data();
    T* v = state.v[t].data();
    T* pd = p.data();
    const T* gd = g.data();
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (T(1) - b1) * gd[i];
      v[i] = b2 * v[i] + (T(1) - b2) * gd[i] * gd[i];
      const T mhat = m[i] / bias1;
      const T vhat = v[i] / bias2;
      pd[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

template <typename T>
T clip_global_norm(const std::vector<Matrix<T>*>& grads, T max_norm) {
  T total = 0;
  for (const Matrix<T>* g : grads) total += kernels::sumsq(g->data(), g->size());
  const T norm = std::sqrt(total);
  if (norm > max_norm && norm > T(0)) {
    const T factor = max_norm / norm;
    for (Matrix<T>* g : grads) kernels::scale(factor, g->data(), g->size());
  }
  return norm;
}

template void adam_step<float>(const std::vector<Matrix<float>*>&,
                               const std::vector<const Matrix<float>*>&, AdamState<float>&,
                               const AdamConfig<float>&);
template void adam_step<double>(const std::vector<Matrix<double>*>&,
                                const std::vector<const Matrix<double>*>&, AdamState<double>&,
                                const AdamConfig<double>&);
template float clip_global_norm<float>(const std::vector<Matrix<float>*>&, float);
template double clip_global_norm<double>(const std::vector<Matrix<double>*>&, double);

}  // namespace kws::ad
