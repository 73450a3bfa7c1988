// Copyright 2026 The hlsim Authors. All Rights Reserved.
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

// Mono RIFF/WAVE reading and writing: 16-bit PCM and 32-bit IEEE float.

#ifndef HLSIM_WAV_HPP_
#define HLSIM_WAV_HPP_

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "hlsim/common.hpp"

namespace hlsim {

enum class WavFormat { kPcm16, kFloat32 };

struct WavData {
  Samples samples;
  double sample_rate = 48000.0;
  WavFormat format = WavFormat::kPcm16;
};

class WavError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace internal {

inline std::uint32_t ReadLe32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t ReadLe16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void PutLe32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void PutLe16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace internal

inline WavData DecodeWav(const std::string& bytes) {
  using internal::ReadLe16;
  using internal::ReadLe32;
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12 || std::memcmp(data, "RIFF", 4) != 0 ||
      std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw WavError("not a RIFF/WAVE file");
  }
  WavData out;
  int bits = 0;
  int tag = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = ReadLe32(data + pos + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) throw WavError("truncated chunk");
    if (std::memcmp(data + pos, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw WavError("short fmt chunk");
      tag = ReadLe16(data + body);
      const int channels = ReadLe16(data + body + 2);
      out.sample_rate = ReadLe32(data + body + 4);
      bits = ReadLe16(data + body + 14);
      if (tag == 0xFFFE && chunk_size >= 40) tag = ReadLe16(data + body + 24);
      if (channels != 1) throw WavError("only mono WAV files are supported");
      have_fmt = true;
    } else if (std::memcmp(data + pos, "data", 4) == 0) {
      if (!have_fmt) throw WavError("data chunk before fmt chunk");
      if (tag == 1 && bits == 16) {
        out.format = WavFormat::kPcm16;
        const std::size_t n = chunk_size / 2;
        out.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          const auto v = static_cast<std::int16_t>(ReadLe16(data + body + 2 * i));
          out.samples[i] = static_cast<double>(v) / 32768.0;
        }
      } else if (tag == 3 && bits == 32) {
        out.format = WavFormat::kFloat32;
        const std::size_t n = chunk_size / 4;
        out.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          const std::uint32_t raw = ReadLe32(data + body + 4 * i);
          float f;
          std::memcpy(&f, &raw, sizeof f);
          out.samples[i] = f;
        }
      } else {
        throw WavError("unsupported WAV encoding (need 16-bit PCM or float32)");
      }
      return out;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  throw WavError("no data chunk");
}

// Encodes `samples`. PCM output is clipped to [-1, 1); float output is
// written unclipped. `clipped` receives the number of samples outside
// [-1, 1] in either case.
inline std::string EncodeWav(const WavData& wav, std::size_t* clipped = nullptr) {
  using internal::PutLe16;
  using internal::PutLe32;
  const bool pcm = wav.format == WavFormat::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(wav.samples.size() * (bits / 8));
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutLe32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutLe32(out, 16);
  PutLe16(out, pcm ? 1 : 3);
  PutLe16(out, 1);
  const auto rate = static_cast<std::uint32_t>(std::llround(wav.sample_rate));
  PutLe32(out, rate);
  PutLe32(out, rate * (bits / 8));
  PutLe16(out, bits / 8);
  PutLe16(out, bits);
  out += "data";
  PutLe32(out, data_bytes);
  std::size_t clip_count = 0;
  for (double v : wav.samples) {
    if (v > 1.0 || v < -1.0) ++clip_count;
    if (pcm) {
      const double scaled = std::round(std::clamp(v, -1.0, 1.0) * 32768.0);
      const auto q = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
      PutLe16(out, static_cast<std::uint16_t>(q));
    } else {
      const auto f = static_cast<float>(v);
      std::uint32_t raw;
      std::memcpy(&raw, &f, sizeof raw);
      PutLe32(out, raw);
    }
  }
  if (clipped != nullptr) *clipped = clip_count;
  return out;
}

inline WavData ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  try {
    return DecodeWav(bytes);
  } catch (const WavError& e) {
    throw WavError(path.string() + ": " + e.what());
  }
}

// Writes through a temporary file and renames it into place.
inline std::size_t WriteWav(const std::filesystem::path& path,
                            const WavData& wav) {
  std::size_t clipped = 0;
  const std::string bytes = EncodeWav(wav, &clipped);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw WavError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw WavError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
  return clipped;
}

}  // namespace hlsim

#endif  // HLSIM_WAV_HPP_
