// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_WAV_HPP_
#define DISTAUG_WAV_HPP_

#include <stdexcept>
#include <string>

#include "distaug/dsp.hpp"

namespace distaug {

struct WavError : std::runtime_error {
  explicit WavError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class WavEncoding { pcm16, float32 };

// Mono RIFF/WAVE only. PCM 16-bit payloads round-trip bit-exactly.
Waveform read_wav(const std::string& path);
void write_wav(const std::string& path, const Waveform& w,
               WavEncoding enc = WavEncoding::pcm16);

}  // namespace distaug

#endif  // DISTAUG_WAV_HPP_
