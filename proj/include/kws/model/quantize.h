// Post-training symmetric int8 quantization: one scale per tensor,
// zero-point 0, scale = max|w| / 127 (1.0 for all-zero tensors),
// round-to-nearest-even. Round-trip error is bounded by scale/2 per entry.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kws/model/lstm.h"

namespace kws::model {

struct QuantizedTensor {
  std::string name;
  std::vector<uint32_t> dims;
  float scale = 1.0f;
  std::vector<int8_t> values;

  size_t size() const {
    size_t n = 1;
    for (uint32_t d : dims) n *= d;
    return n;
  }
};

struct QuantizedModel {
  ModelConfig config;
  std::vector<QuantizedTensor> tensors;
};

QuantizedTensor quantize_tensor(const std::string& name, const MatF& m);
MatF dequantize_tensor(const QuantizedTensor& t);

QuantizedModel quantize_int8(const ModelParams& params);
ModelParams dequantize(const QuantizedModel& model);

}  // namespace kws::model
