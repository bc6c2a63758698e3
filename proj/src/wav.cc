// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distaug/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace distaug {

namespace {

void put_u32(std::vector<char>* out, uint32_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>((v >> 8) & 0xff));
  out->push_back(static_cast<char>((v >> 16) & 0xff));
  out->push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::vector<char>* out, uint16_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>((v >> 8) & 0xff));
}

uint32_t get_u32(const char* p) {
  return static_cast<uint8_t>(p[0]) | (static_cast<uint8_t>(p[1]) << 8) |
         (static_cast<uint8_t>(p[2]) << 16) |
         (static_cast<uint8_t>(p[3]) << 24);
}

uint16_t get_u16(const char* p) {
  return static_cast<uint16_t>(static_cast<uint8_t>(p[0]) |
                               (static_cast<uint8_t>(p[1]) << 8));
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError("cannot open " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  if (buf.size() < 44 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw WavError("not a RIFF/WAVE file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  size_t data_off = 0, data_len = 0;
  size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const char* id = buf.data() + pos;
    uint32_t len = get_u32(buf.data() + pos + 4);
    size_t body = pos + 8;
    if (body + len > buf.size()) len = static_cast<uint32_t>(buf.size() - body);
    if (std::memcmp(id, "fmt ", 4) == 0 && len >= 16) {
      format = get_u16(buf.data() + body);
      channels = get_u16(buf.data() + body + 2);
      sample_rate = get_u32(buf.data() + body + 4);
      bits = get_u16(buf.data() + body + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = body;
      data_len = len;
    }
    pos = body + len + (len & 1);  // chunks are word-aligned
  }
  if (data_off == 0) throw WavError("no data chunk in " + path);
  if (channels != 1) throw WavError("only mono supported: " + path);

  Waveform w;
  w.sample_rate_hz = static_cast<int>(sample_rate);
  if (format == 1 && bits == 16) {
    size_t n = data_len / 2;
    w.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      int16_t s = static_cast<int16_t>(get_u16(buf.data() + data_off + 2 * i));
      w.samples[i] = static_cast<double>(s) / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    size_t n = data_len / 4;
    w.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      uint32_t u = get_u32(buf.data() + data_off + 4 * i);
      float f;
      std::memcpy(&f, &u, 4);
      w.samples[i] = static_cast<double>(f);
    }
  } else {
    throw WavError("unsupported encoding (fmt=" + std::to_string(format) +
                   ", bits=" + std::to_string(bits) + "): " + path);
  }
  return w;
}

void write_wav(const std::string& path, const Waveform& w, WavEncoding enc) {
  const uint16_t bits = (enc == WavEncoding::pcm16) ? 16 : 32;
  const uint16_t fmt = (enc == WavEncoding::pcm16) ? 1 : 3;
  const uint32_t byte_rate = w.sample_rate_hz * bits / 8;
  const uint32_t data_len =
      static_cast<uint32_t>(w.samples.size()) * bits / 8;

  std::vector<char> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(&out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(&out, 16);
  put_u16(&out, fmt);
  put_u16(&out, 1);  // mono
  put_u32(&out, static_cast<uint32_t>(w.sample_rate_hz));
  put_u32(&out, byte_rate);
  put_u16(&out, bits / 8);
  put_u16(&out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(&out, data_len);

  if (enc == WavEncoding::pcm16) {
    for (double s : w.samples) {
      double scaled = s * 32768.0;
      long q = std::lround(scaled);
      if (q > 32767) q = 32767;
      if (q < -32768) q = -32768;
      put_u16(&out, static_cast<uint16_t>(static_cast<int16_t>(q)));
    }
  } else {
    for (double s : w.samples) {
      float f = static_cast<float>(s);
      uint32_t u;
      std::memcpy(&u, &f, 4);
      put_u32(&out, u);
    }
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw WavError("cannot write " + path);
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw WavError("short write to " + path);
}

}  // namespace distaug
