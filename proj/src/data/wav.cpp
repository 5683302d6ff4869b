#include "kws/data/wav.h"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "kws/common/errors.h"

namespace kws::data {

namespace {

uint32_t le32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t le16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v));
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v >> 16));
  out.push_back(static_cast<char>(v >> 24));
}

void put16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

dsp::AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open wav: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const size_t n = bytes.size();
  if (n < 44 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw UnsupportedFormatError("not a RIFF/WAVE file: " + path.string());

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char* data = nullptr;
  uint32_t data_len = 0;

  size_t off = 12;
  while (off + 8 <= n) {
    const uint32_t chunk_len = le32(p + off + 4);
    if (std::memcmp(p + off, "fmt ", 4) == 0) {
      if (off + 8 + 16 > n) throw UnsupportedFormatError("truncated fmt chunk: " + path.string());
      format = le16(p + off + 8);
      channels = le16(p + off + 10);
      rate = le32(p + off + 12);
      bits = le16(p + off + 22);
    } else if (std::memcmp(p + off, "data", 4) == 0) {
      if (off + 8 + chunk_len > n)
        throw UnsupportedFormatError("truncated data chunk: " + path.string());
      data = p + off + 8;
      data_len = chunk_len;
    }
    off += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (data == nullptr || format == 0)
    throw UnsupportedFormatError("missing fmt/data chunk: " + path.string());
  if (format != 1 || bits != 16)
    throw UnsupportedFormatError("need PCM16, got format " + std::to_string(format) + "/" +
                                 std::to_string(bits) + " bits: " + path.string());
  if (channels != 1)
    throw UnsupportedFormatError("need mono, got " + std::to_string(channels) +
                                 " channels: " + path.string());
  if (rate != dsp::kSampleRateHz)
    throw UnsupportedFormatError("need 16000 Hz, got " + std::to_string(rate) +
                                 " Hz: " + path.string());

  dsp::AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(rate);
  const size_t count = data_len / 2;
  clip.samples.resize(count);
  for (size_t i = 0; i < count; ++i) {
    const int16_t s = static_cast<int16_t>(le16(data + 2 * i));
    clip.samples[i] = static_cast<float>(s) / 32768.0f;
  }
  return clip;
}

void write_wav_pcm16(const std::filesystem::path& path, const std::vector<float>& samples,
                     int sample_rate_hz) {
  const uint32_t data_len = static_cast<uint32_t>(samples.size() * 2);
  std::string out;
  out.reserve(44 + data_len);
  out.append("RIFF");
  put32(out, 36 + data_len);
  out.append("WAVE");
  out.append("fmt ");
  put32(out, 16);
  put16(out, 1);  // PCM
  put16(out, 1);  // mono
  put32(out, static_cast<uint32_t>(sample_rate_hz));
  put32(out, static_cast<uint32_t>(sample_rate_hz * 2));  // byte rate
  put16(out, 2);                                          // block align
  put16(out, 16);                                         // bits
  out.append("data");
  put32(out, data_len);
  for (float v : samples) {
    const float clamped = std::min(1.0f, std::max(-1.0f, v));
    const int32_t s = static_cast<int32_t>(std::lrintf(clamped * 32767.0f));
    put16(out, static_cast<uint16_t>(static_cast<int16_t>(s)));
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open wav for writing: " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw IoError("short write to wav: " + path.string());
}

}  // namespace kws::data
