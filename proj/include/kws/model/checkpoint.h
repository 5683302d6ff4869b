// Checkpoint container:
//   magic "S4KC" | version u32 | input_dim, num_layers, hidden_dim,
//   embedding_dim (u32 each) | tensor count u32 | per tensor:
//   name (len u32 + bytes) | dtype u8 (0 = float32, 1 = int8) | rank u32 |
//   dims u32[rank] | payload (float32 data, or float32 scale + int8 data).
// All integers and floats little-endian.
#pragma once

#include <filesystem>

#include "kws/model/lstm.h"
#include "kws/model/quantize.h"

namespace kws::model {

constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

void save_quantized_checkpoint(const QuantizedModel& model, const std::filesystem::path& path);
QuantizedModel load_quantized_checkpoint(const std::filesystem::path& path);

// True if the file holds int8 tensors.
bool checkpoint_is_quantized(const std::filesystem::path& path);

// Loads either variant, dequantizing if needed.
ModelParams load_any_checkpoint(const std::filesystem::path& path);

}  // namespace kws::model
