// Copyright 2026 The bridgesr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bridgesr/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "bridgesr/io_util.hpp"

namespace bridgesr {

namespace {

constexpr int kMinRate = 8000;
constexpr int kMaxRate = 192000;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::int32_t quantize(double x, double full_scale) {
  const double c = std::clamp(x, -1.0, 1.0);
  return static_cast<std::int32_t>(std::lround(std::clamp(c * full_scale, -full_scale, full_scale - 1.0)));
}

}  // namespace

void validate(const Waveform& wav) {
  if (wav.sample_rate <= 0) throw std::invalid_argument("waveform: sample rate must be positive");
  for (double s : wav.samples) {
    if (!std::isfinite(s)) throw std::invalid_argument("waveform: non-finite sample");
  }
}

std::vector<std::uint8_t> encode_wav(const Waveform& wav, WavEncoding encoding) {
  validate(wav);
  if (wav.sample_rate < kMinRate || wav.sample_rate > kMaxRate) {
    throw std::invalid_argument("wav: sample rate " + std::to_string(wav.sample_rate) +
                                " outside 8000..192000");
  }
  const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : encoding == WavEncoding::Pcm24 ? 24 : 32;
  const std::uint16_t format = encoding == WavEncoding::Float32 ? 3 : 1;
  const std::uint16_t block = bits / 8;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(wav.size() * block);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(wav.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(wav.sample_rate) * block);
  put_u16(out, block);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_bytes);

  for (double s : wav.samples) {
    switch (encoding) {
      case WavEncoding::Pcm16:
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(quantize(s, 32768.0))));
        break;
      case WavEncoding::Pcm24: {
        const auto v = static_cast<std::uint32_t>(quantize(s, 8388608.0));
        for (int i = 0; i < 3; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
        break;
      }
      case WavEncoding::Float32: {
        const float f = static_cast<float>(s);
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        put_u32(out, u);
        break;
      }
    }
  }
  return out;
}

Waveform decode_wav(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error("wav: not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t len = get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) {
      // Some writers leave a bogus data length on streamed files; clamp it.
      if (std::memcmp(chunk, "data", 4) != 0) throw std::runtime_error("wav: truncated chunk");
    }
    const std::size_t avail = std::min<std::size_t>(len, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw std::runtime_error("wav: short fmt chunk");
      format = get_u16(chunk + 8);
      channels = get_u16(chunk + 10);
      rate = get_u32(chunk + 12);
      bits = get_u16(chunk + 22);
      if (format == 0xFFFE && avail >= 26) format = get_u16(chunk + 32);  // WAVE_FORMAT_EXTENSIBLE
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_len = avail;
    }
    pos = body + len + (len & 1u);
  }
  if (data == nullptr || rate == 0) throw std::runtime_error("wav: missing fmt or data chunk");
  if (channels != 1) throw std::runtime_error("wav: only mono files are supported");
  if (rate < kMinRate || rate > kMaxRate) {
    throw std::runtime_error("wav: sample rate " + std::to_string(rate) + " outside 8000..192000");
  }

  Waveform wav;
  wav.sample_rate = static_cast<int>(rate);
  if (format == 1 && bits == 16) {
    const std::size_t n = data_len / 2;
    wav.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      wav.samples[i] = static_cast<std::int16_t>(get_u16(data + 2 * i)) / 32768.0;
    }
  } else if (format == 1 && bits == 24) {
    const std::size_t n = data_len / 3;
    wav.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint8_t* p = data + 3 * i;
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v |= ~0xffffff;
      wav.samples[i] = v / 8388608.0;
    }
  } else if (format == 3 && bits == 32) {
    const std::size_t n = data_len / 4;
    wav.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t u = get_u32(data + 4 * i);
      float f;
      std::memcpy(&f, &u, 4);
      wav.samples[i] = f;
    }
  } else {
    throw std::runtime_error("wav: unsupported encoding (format " + std::to_string(format) + ", " +
                             std::to_string(bits) + " bits)");
  }
  validate(wav);
  return wav;
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("wav: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_wav(const std::filesystem::path& path, const Waveform& wav, WavEncoding encoding) {
  const auto bytes = encode_wav(wav, encoding);
  write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

}  // namespace bridgesr
