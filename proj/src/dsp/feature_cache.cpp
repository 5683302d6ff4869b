#include "kws/dsp/feature_cache.h"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "kws/common/errors.h"

namespace kws::dsp {

namespace {

constexpr char kMagic[4] = {'S', '4', 'K', 'F'};

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

}  // namespace

void write_feature_cache(const std::filesystem::path& path, const FeatureMatrix& features) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open feature cache for writing: " + path.string());
  os.write(kMagic, 4);
  write_u32(os, kFeatureCacheVersion);
  write_u32(os, static_cast<uint32_t>(features.frames.rows()));
  write_u32(os, static_cast<uint32_t>(features.frames.cols()));
  static_assert(sizeof(float) == 4);
  os.write(reinterpret_cast<const char*>(features.frames.data()),
           static_cast<std::streamsize>(features.frames.size() * sizeof(float)));
  if (!os) throw IoError("short write to feature cache: " + path.string());
}

FeatureMatrix read_feature_cache(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open feature cache: " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw UnsupportedFormatError("bad feature cache magic: " + path.string());
  const uint32_t version = read_u32(is);
  if (version != kFeatureCacheVersion)
    throw UnsupportedFormatError("unsupported feature cache version " + std::to_string(version) +
                                 ": " + path.string());
  const uint32_t t = read_u32(is);
  const uint32_t d = read_u32(is);
  if (!is || t == 0 || d == 0 || static_cast<uint64_t>(t) * d > (1u << 28))
    throw UnsupportedFormatError("implausible feature cache shape: " + path.string());
  FeatureMatrix out;
  out.frames = MatF(t, d);
  is.read(reinterpret_cast<char*>(out.frames.data()),
          static_cast<std::streamsize>(out.frames.size() * sizeof(float)));
  if (is.gcount() != static_cast<std::streamsize>(out.frames.size() * sizeof(float)))
    throw UnsupportedFormatError("truncated feature cache: " + path.string());
  return out;
}

bool feature_cache_valid(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return false;
  try {
    (void)read_feature_cache(path);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::string feature_cache_name(const std::string& audio_path) {
  // FNV-1a over the full path keeps names unique across directories.
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : audio_path) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::filesystem::path p(audio_path);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return p.stem().string() + "_" + hex + ".feat";
}

}  // namespace kws::dsp
