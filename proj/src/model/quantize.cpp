#include "kws/model/quantize.h"

#include <cmath>

#include "kws/common/errors.h"

namespace kws::model {

QuantizedTensor quantize_tensor(const std::string& name, const MatF& m) {
  if (!m.all_finite()) throw NonFiniteError("quantize: tensor " + name + " has non-finite values");
  float max_abs = 0.0f;
  for (size_t i = 0; i < m.size(); ++i) max_abs = std::max(max_abs, std::fabs(m.data()[i]));

  QuantizedTensor t;
  t.name = name;
  t.dims = {static_cast<uint32_t>(m.rows()), static_cast<uint32_t>(m.cols())};
  t.scale = max_abs > 0.0f ? max_abs / 127.0f : 1.0f;
  t.values.resize(m.size());
  for (size_t i = 0; i < m.size(); ++i) {
    // nearbyint rounds half to even under the default FP environment.
    const float q = std::nearbyint(m.data()[i] / t.scale);
    t.values[i] = static_cast<int8_t>(std::min(127.0f, std::max(-127.0f, q)));
  }
  return t;
}

MatF dequantize_tensor(const QuantizedTensor& t) {
  if (t.dims.size() != 2) throw ShapeMismatchError("dequantize: tensor " + t.name + " is not 2-d");
  MatF m(t.dims[0], t.dims[1]);
  for (size_t i = 0; i < m.size(); ++i)
    m.data()[i] = t.scale * static_cast<float>(t.values[i]);
  return m;
}

QuantizedModel quantize_int8(const ModelParams& params) {
  QuantizedModel q;
  q.config = params.config;
  const auto tensors = params.tensors();
  const auto names = params.tensor_names();
  for (size_t i = 0; i < tensors.size(); ++i)
    q.tensors.push_back(quantize_tensor(names[i], *tensors[i]));
  return q;
}

ModelParams dequantize(const QuantizedModel& model) {
  ModelParams p;
  p.config = model.config;
  p.layers.resize(model.config.num_layers);
  const auto names = p.tensor_names();  // requires layers sized first
  if (names.size() != model.tensors.size())
    throw ShapeMismatchError("dequantize: expected " + std::to_string(names.size()) +
                             " tensors, got " + std::to_string(model.tensors.size()));
  const auto slots = p.tensors();
  for (size_t i = 0; i < names.size(); ++i) {
    if (model.tensors[i].name != names[i])
      throw UnsupportedFormatError("dequantize: tensor " + std::to_string(i) + " named '" +
                                   model.tensors[i].name + "', expected '" + names[i] + "'");
    *slots[i] = dequantize_tensor(model.tensors[i]);
  }
  return p;
}

}  // namespace kws::model
