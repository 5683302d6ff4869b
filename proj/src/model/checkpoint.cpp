#include "kws/model/checkpoint.h"

#include <cstring>
#include <fstream>

#include "kws/common/errors.h"

namespace kws::model {

namespace {

constexpr char kMagic[4] = {'S', '4', 'K', 'C'};
constexpr uint8_t kDtypeF32 = 0;
constexpr uint8_t kDtypeI8 = 1;

void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  const uint32_t len = read_u32(is);
  if (len > 4096) throw UnsupportedFormatError("checkpoint: implausible name length");
  std::string s(len, '\0');
  is.read(s.data(), len);
  return s;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path.string());
  return is;
}

ModelConfig read_header(std::istream& is, const std::filesystem::path& path) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw UnsupportedFormatError("not a checkpoint file: " + path.string());
  const uint32_t version = read_u32(is);
  if (version != kCheckpointVersion)
    throw UnsupportedFormatError("unsupported checkpoint version " + std::to_string(version));
  ModelConfig config;
  config.input_dim = static_cast<int>(read_u32(is));
  config.num_layers = static_cast<int>(read_u32(is));
  config.hidden_dim = static_cast<int>(read_u32(is));
  config.embedding_dim = static_cast<int>(read_u32(is));
  config.validate();
  return config;
}

void write_header(std::ostream& os, const ModelConfig& config) {
  os.write(kMagic, 4);
  write_u32(os, kCheckpointVersion);
  write_u32(os, static_cast<uint32_t>(config.input_dim));
  write_u32(os, static_cast<uint32_t>(config.num_layers));
  write_u32(os, static_cast<uint32_t>(config.hidden_dim));
  write_u32(os, static_cast<uint32_t>(config.embedding_dim));
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  auto os = open_out(path);
  write_header(os, params.config);
  const auto tensors = params.tensors();
  const auto names = params.tensor_names();
  write_u32(os, static_cast<uint32_t>(tensors.size()));
  static_assert(sizeof(float) == 4);
  for (size_t i = 0; i < tensors.size(); ++i) {
    write_string(os, names[i]);
    os.put(static_cast<char>(kDtypeF32));
    write_u32(os, 2);
    write_u32(os, static_cast<uint32_t>(tensors[i]->rows()));
    write_u32(os, static_cast<uint32_t>(tensors[i]->cols()));
    os.write(reinterpret_cast<const char*>(tensors[i]->data()),
             static_cast<std::streamsize>(tensors[i]->size() * sizeof(float)));
  }
  if (!os) throw IoError("short write to checkpoint: " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  auto is = open_in(path);
  ModelParams p;
  p.config = read_header(is, path);
  p.layers.resize(p.config.num_layers);
  const auto names = p.tensor_names();
  const auto slots = p.tensors();
  const uint32_t count = read_u32(is);
  if (count != names.size())
    throw UnsupportedFormatError("checkpoint: expected " + std::to_string(names.size()) +
                                 " tensors, found " + std::to_string(count));
  for (size_t i = 0; i < count; ++i) {
    const std::string name = read_string(is);
    if (name != names[i])
      throw UnsupportedFormatError("checkpoint: tensor '" + name + "', expected '" + names[i] + "'");
    const int dtype = is.get();
    if (dtype != kDtypeF32)
      throw UnsupportedFormatError("checkpoint: tensor '" + name + "' is not float32");
    const uint32_t rank = read_u32(is);
    if (rank != 2) throw UnsupportedFormatError("checkpoint: tensor '" + name + "' rank != 2");
    const uint32_t rows = read_u32(is);
    const uint32_t cols = read_u32(is);
    MatF m(rows, cols);
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(float)));
    if (!is) throw UnsupportedFormatError("checkpoint truncated in tensor '" + name + "'");
    *slots[i] = std::move(m);
  }
  return p;
}

void save_quantized_checkpoint(const QuantizedModel& model, const std::filesystem::path& path) {
  auto os = open_out(path);
  write_header(os, model.config);
  write_u32(os, static_cast<uint32_t>(model.tensors.size()));
  for (const QuantizedTensor& t : model.tensors) {
    write_string(os, t.name);
    os.put(static_cast<char>(kDtypeI8));
    write_u32(os, static_cast<uint32_t>(t.dims.size()));
    for (uint32_t d : t.dims) write_u32(os, d);
    float scale = t.scale;
    os.write(reinterpret_cast<const char*>(&scale), sizeof(float));
    os.write(reinterpret_cast<const char*>(t.values.data()),
             static_cast<std::streamsize>(t.values.size()));
  }
  if (!os) throw IoError("short write to checkpoint: " + path.string());
}

QuantizedModel load_quantized_checkpoint(const std::filesystem::path& path) {
  auto is = open_in(path);
  QuantizedModel q;
  q.config = read_header(is, path);
  const uint32_t count = read_u32(is);
  if (count > 1024) throw UnsupportedFormatError("checkpoint: implausible tensor count");
  for (uint32_t i = 0; i < count; ++i) {
    QuantizedTensor t;
    t.name = read_string(is);
    const int dtype = is.get();
    if (dtype != kDtypeI8)
      throw UnsupportedFormatError("checkpoint: tensor '" + t.name + "' is not int8");
    const uint32_t rank = read_u32(is);
    if (rank == 0 || rank > 4)
      throw UnsupportedFormatError("checkpoint: tensor '" + t.name + "' bad rank");
    for (uint32_t r = 0; r < rank; ++r) t.dims.push_back(read_u32(is));
    is.read(reinterpret_cast<char*>(&t.scale), sizeof(float));
    t.values.resize(t.size());
    is.read(reinterpret_cast<char*>(t.values.data()),
            static_cast<std::streamsize>(t.values.size()));
    if (!is) throw UnsupportedFormatError("checkpoint truncated in tensor '" + t.name + "'");
    q.tensors.push_back(std::move(t));
  }
  return q;
}

bool checkpoint_is_quantized(const std::filesystem::path& path) {
  auto is = open_in(path);
  (void)read_header(is, path);
  (void)read_u32(is);       // tensor count
  (void)read_string(is);    // first tensor name
  const int dtype = is.get();
  if (!is) throw UnsupportedFormatError("checkpoint truncated: " + path.string());
  return dtype == kDtypeI8;
}

ModelParams load_any_checkpoint(const std::filesystem::path& path) {
  return checkpoint_is_quantized(path) ? dequantize(load_quantized_checkpoint(path))
                                       : load_checkpoint(path);
}

}  // namespace kws::model
