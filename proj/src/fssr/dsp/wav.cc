// fssr/dsp/wav.cc
//
// Copyright 2026  FSSR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fssr/dsp/wav.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "fssr/common/error.h"

namespace fssr {
namespace dsp {

namespace {

constexpr uint16_t kFormatPcm = 0x0001;
constexpr uint16_t kFormatIeeeFloat = 0x0003;
constexpr uint16_t kFormatExtensible = 0xFFFE;

struct Reader {
  std::ifstream in;
  std::string path;

  explicit Reader(const std::string &p) : in(p, std::ios::binary), path(p) {
    if (!in)
      FSSR_RAISE(ErrorCode::kUnreadableFile) << "cannot open wav: " << p;
  }

  void Bytes(void *dst, size_t n) {
    in.read(reinterpret_cast<char *>(dst), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in.gcount()) != n)
      FSSR_RAISE(ErrorCode::kUnreadableFile)
          << "truncated wav file: " << path;
  }
  uint32_t U32() {
    uint8_t b[4];
    Bytes(b, 4);
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 |
           static_cast<uint32_t>(b[3]) << 24;
  }
  uint16_t U16() {
    uint8_t b[2];
    Bytes(b, 2);
    return static_cast<uint16_t>(b[0] | b[1] << 8);
  }
  void Skip(uint32_t n) { in.seekg(n, std::ios::cur); }
};

struct FmtChunk {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
};

// Walks chunks until both fmt and data are located. Returns the byte size of
// the data chunk and leaves the stream positioned at its payload when
// want_data is true.
FmtChunk ParseHeader(Reader &r, uint32_t *data_size, bool want_data) {
  char tag[4];
  r.Bytes(tag, 4);
  if (std::memcmp(tag, "RIFF", 4) != 0)
    FSSR_RAISE(ErrorCode::kUnreadableFile) << "not a RIFF file: " << r.path;
  r.U32();  // riff size
  r.Bytes(tag, 4);
  if (std::memcmp(tag, "WAVE", 4) != 0)
    FSSR_RAISE(ErrorCode::kUnreadableFile) << "not a WAVE file: " << r.path;

  FmtChunk fmt;
  bool have_fmt = false;
  for (;;) {
    if (!r.in.good() || r.in.peek() == EOF)
      FSSR_RAISE(ErrorCode::kUnreadableFile)
          << "wav missing fmt/data chunk: " << r.path;
    r.Bytes(tag, 4);
    uint32_t size = r.U32();
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16)
        FSSR_RAISE(ErrorCode::kUnreadableFile) << "bad fmt chunk: " << r.path;
      fmt.format = r.U16();
      fmt.channels = r.U16();
      fmt.sample_rate = r.U32();
      r.U32();  // byte rate
      r.U16();  // block align
      fmt.bits = r.U16();
      uint32_t consumed = 16;
      if (fmt.format == kFormatExtensible && size >= 40) {
        r.U16();  // cbSize
        r.U16();  // valid bits
        r.U32();  // channel mask
        fmt.format = r.U16();  // first two bytes of the subformat GUID
        r.Skip(14);
        consumed = 40;
      }
      if (size > consumed) r.Skip(size - consumed);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt)
        FSSR_RAISE(ErrorCode::kUnreadableFile)
            << "wav data before fmt: " << r.path;
      *data_size = size;
      if (!want_data) return fmt;
      return fmt;
    } else {
      // Unknown chunk (LIST, fact, ...); chunks are word aligned.
      r.Skip(size + (size & 1));
    }
  }
}

void ValidateFmt(const FmtChunk &fmt, const std::string &path) {
  if (fmt.channels == 0 || fmt.sample_rate == 0)
    FSSR_RAISE(ErrorCode::kUnreadableFile) << "bad wav header: " << path;
  const bool pcm_ok =
      fmt.format == kFormatPcm &&
      (fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32);
  const bool float_ok =
      fmt.format == kFormatIeeeFloat && (fmt.bits == 32 || fmt.bits == 64);
  if (!pcm_ok && !float_ok)
    FSSR_RAISE(ErrorCode::kUnreadableFile)
        << "unsupported wav codec (format=" << fmt.format
        << ", bits=" << fmt.bits << "): " << path;
}

}  // namespace

WavData ReadWav(const std::string &path) {
  Reader r(path);
  uint32_t data_size = 0;
  const FmtChunk fmt = ParseHeader(r, &data_size, /*want_data=*/true);
  ValidateFmt(fmt, path);

  const int bytes_per_sample = fmt.bits / 8;
  const int64_t n_values = data_size / bytes_per_sample;
  if (n_values == 0)
    FSSR_RAISE(ErrorCode::kEmptyAudio) << "wav has no samples: " << path;

  std::vector<uint8_t> raw(static_cast<size_t>(data_size));
  r.Bytes(raw.data(), raw.size());

  WavData out;
  out.sample_rate_hz = static_cast<int>(fmt.sample_rate);
  out.channels = fmt.channels;
  out.samples.resize(static_cast<size_t>(n_values));

  const uint8_t *p = raw.data();
  if (fmt.format == kFormatPcm && fmt.bits == 16) {
    for (int64_t i = 0; i < n_values; ++i, p += 2) {
      const int16_t v = static_cast<int16_t>(p[0] | p[1] << 8);
      out.samples[i] = static_cast<float>(v) / 32768.0f;
    }
  } else if (fmt.format == kFormatPcm && fmt.bits == 24) {
    for (int64_t i = 0; i < n_values; ++i, p += 3) {
      int32_t v = p[0] | p[1] << 8 | p[2] << 16;
      if (v & 0x800000) v |= ~0xFFFFFF;  // sign extend
      out.samples[i] = static_cast<float>(v) / 8388608.0f;
    }
  } else if (fmt.format == kFormatPcm && fmt.bits == 32) {
    for (int64_t i = 0; i < n_values; ++i, p += 4) {
      int32_t v;
      std::memcpy(&v, p, 4);
      out.samples[i] = static_cast<float>(v / 2147483648.0);
    }
  } else if (fmt.format == kFormatIeeeFloat && fmt.bits == 32) {
    for (int64_t i = 0; i < n_values; ++i, p += 4) {
      float v;
      std::memcpy(&v, p, 4);
      out.samples[i] = v;
    }
  } else {  // float64
    for (int64_t i = 0; i < n_values; ++i, p += 8) {
      double v;
      std::memcpy(&v, p, 8);
      out.samples[i] = static_cast<float>(v);
    }
  }
  // Truncate a trailing partial frame if the data size was not a multiple of
  // the frame size.
  const int64_t frames = n_values / fmt.channels;
  if (frames == 0)
    FSSR_RAISE(ErrorCode::kEmptyAudio) << "wav has no complete frame: " << path;
  out.samples.resize(static_cast<size_t>(frames * fmt.channels));
  return out;
}

WavInfo ReadWavInfo(const std::string &path) {
  Reader r(path);
  uint32_t data_size = 0;
  const FmtChunk fmt = ParseHeader(r, &data_size, /*want_data=*/false);
  ValidateFmt(fmt, path);
  WavInfo info;
  info.sample_rate_hz = static_cast<int>(fmt.sample_rate);
  info.channels = fmt.channels;
  info.frames = static_cast<int64_t>(data_size) / (fmt.bits / 8) / fmt.channels;
  return info;
}

namespace {

void WriteHeader(std::ofstream &o, uint16_t format, uint16_t bits,
                 int sample_rate_hz, int channels, uint32_t data_bytes) {
  auto u32 = [&o](uint32_t v) {
    uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                    static_cast<uint8_t>(v >> 16),
                    static_cast<uint8_t>(v >> 24)};
    o.write(reinterpret_cast<char *>(b), 4);
  };
  auto u16 = [&o](uint16_t v) {
    uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
    o.write(reinterpret_cast<char *>(b), 2);
  };
  const uint16_t block_align = static_cast<uint16_t>(channels * bits / 8);
  o.write("RIFF", 4);
  u32(36 + data_bytes);
  o.write("WAVE", 4);
  o.write("fmt ", 4);
  u32(16);
  u16(format);
  u16(static_cast<uint16_t>(channels));
  u32(static_cast<uint32_t>(sample_rate_hz));
  u32(static_cast<uint32_t>(sample_rate_hz) * block_align);
  u16(block_align);
  u16(bits);
  o.write("data", 4);
  u32(data_bytes);
}

}  // namespace

void WriteWav16(const std::string &path, const std::vector<float> &interleaved,
                int sample_rate_hz, int channels) {
  std::ofstream o(path, std::ios::binary);
  if (!o) FSSR_RAISE(ErrorCode::kIo) << "cannot write wav: " << path;
  const uint32_t data_bytes = static_cast<uint32_t>(interleaved.size() * 2);
  WriteHeader(o, kFormatPcm, 16, sample_rate_hz, channels, data_bytes);
  for (float f : interleaved) {
    const float c = std::clamp(f, -1.0f, 1.0f);
    const int32_t q = static_cast<int32_t>(std::lrintf(c * 32767.0f));
    const int16_t v = static_cast<int16_t>(std::clamp(q, -32768, 32767));
    uint8_t b[2] = {static_cast<uint8_t>(v & 0xFF),
                    static_cast<uint8_t>((v >> 8) & 0xFF)};
    o.write(reinterpret_cast<char *>(b), 2);
  }
  if (!o) FSSR_RAISE(ErrorCode::kIo) << "short write: " << path;
}

void WriteWavFloat(const std::string &path,
                   const std::vector<float> &interleaved, int sample_rate_hz,
                   int channels) {
  std::ofstream o(path, std::ios::binary);
  if (!o) FSSR_RAISE(ErrorCode::kIo) << "cannot write wav: " << path;
  const uint32_t data_bytes = static_cast<uint32_t>(interleaved.size() * 4);
  WriteHeader(o, kFormatIeeeFloat, 32, sample_rate_hz, channels, data_bytes);
  o.write(reinterpret_cast<const char *>(interleaved.data()),
          static_cast<std::streamsize>(data_bytes));
  if (!o) FSSR_RAISE(ErrorCode::kIo) << "short write: " << path;
}

}  // namespace dsp
}  // namespace fssr
