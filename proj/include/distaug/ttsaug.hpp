// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_TTSAUG_HPP_
#define DISTAUG_TTSAUG_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "distaug/dsp.hpp"
#include "distaug/manifest.hpp"

namespace distaug {
namespace ttsaug {

struct TtsError : std::runtime_error {
  explicit TtsError(const std::string& msg) : std::runtime_error(msg) {}
};
struct EngineUnreachable : TtsError {
  explicit EngineUnreachable(const std::string& endpoint)
      : TtsError("synthesis engine unreachable: " + endpoint) {}
};
struct SynthesisFailed : TtsError {
  explicit SynthesisFailed(const std::string& why)
      : TtsError("synthesis failed: " + why) {}
};

enum class CondKind { xvector, gst };

const char* cond_kind_name(CondKind k);
CondKind cond_kind_from_string(const std::string& s);

// Per-kind expected vector lengths for table validation.
struct CondDims {
  int xvector = 512;
  int gst = 256;

  int expected(CondKind k) const {
    return k == CondKind::xvector ? xvector : gst;
  }
};

// Opaque speaker/style embedding; produced by external models and only
// carried through to the engine.
struct ConditioningVector {
  CondKind kind = CondKind::xvector;
  std::vector<double> values;
  std::string source_utt;

  void validate(const CondDims& dims) const;
};

struct SynthesisRequest {
  std::string text;
  ConditioningVector xvector;
  ConditioningVector gst;
  uint64_t seed = 0;

  void validate() const;  // throws SynthesisFailed on empty text
};

class SynthesisEngine {
 public:
  virtual ~SynthesisEngine() = default;
  virtual Waveform synthesize(const SynthesisRequest& req) = 0;
  virtual std::string name() const = 0;
};

// Deterministic stand-in engine: each text byte becomes a fixed-length
// tone segment whose frequency depends on the byte value; the seed sets
// per-segment phases. Output duration is exactly proportional to text
// length.
class StubEngine : public SynthesisEngine {
 public:
  static constexpr int kSampleRate = 16000;
  static constexpr int kSamplesPerChar = 1280;  // 80 ms

  Waveform synthesize(const SynthesisRequest& req) override;
  std::string name() const override { return "stub"; }
};

// One POST per utterance: JSON {text, seed, xvector, gst} in,
// JSON {sample_rate_hz, samples} out.
class HttpEngine : public SynthesisEngine {
 public:
  explicit HttpEngine(const std::string& endpoint);
  Waveform synthesize(const SynthesisRequest& req) override;
  std::string name() const override { return endpoint_; }

 private:
  std::string endpoint_;
};

// Chooses the stub for "stub", otherwise treats the spec as an HTTP
// endpoint URI.
std::unique_ptr<SynthesisEngine> make_engine(const std::string& spec);

struct ConditioningEntry {
  ConditioningVector xvector;
  ConditioningVector gst;
  bool has_xvector = false;
  bool has_gst = false;
};

using ConditioningTable = std::map<std::string, ConditioningEntry>;

// File format: utt_id<TAB>kind<TAB>comma-separated floats, one vector
// per line. Throws TtsError on malformed rows or dimension mismatches.
ConditioningTable read_conditioning_table(const std::string& path,
                                          const CondDims& dims);

struct SnrRange {
  double lo_db = 10.0;
  double hi_db = 20.0;

  void validate() const;
};

// Accepts "LO:HI" with "inf" allowed for either bound.
SnrRange parse_snr_range(const std::string& s);

struct TtsAugmentOptions {
  SnrRange snr;
  bool perturb = true;  // false: emit raw synthesis (no RIR, no noise)
  uint64_t seed = 0;
  std::string out_dir;
  int jobs = 1;
};

struct TtsAugmentResult {
  Manifest manifest;
  std::vector<RecordFailure> failures;
};

// Synthesizes every record's text, then applies convolve_rir followed by
// mix_at_snr with per-record draws derived from (seed, utt_id). Synthesis
// runs sequentially against the engine; perturbation and file writes run
// in parallel across records.
TtsAugmentResult tts_augment(const Manifest& in, const ConditioningTable& cond,
                             SynthesisEngine* engine,
                             const std::vector<Waveform>& rir_pool,
                             const std::vector<Waveform>& noise_pool,
                             const TtsAugmentOptions& opts);

// All *.wav files under dir, sorted by filename.
std::vector<Waveform> load_wav_pool(const std::string& dir);

}  // namespace ttsaug
}  // namespace distaug

#endif  // DISTAUG_TTSAUG_HPP_
