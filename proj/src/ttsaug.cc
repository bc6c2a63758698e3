// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distaug/ttsaug.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "distaug/parallel.hpp"
#include "distaug/seeding.hpp"
#include "distaug/wav.hpp"

#include "httplib.h"
#include "json.hpp"

namespace distaug {
namespace ttsaug {

const char* cond_kind_name(CondKind k) {
  return k == CondKind::xvector ? "xvector" : "gst";
}

CondKind cond_kind_from_string(const std::string& s) {
  if (s == "xvector") return CondKind::xvector;
  if (s == "gst") return CondKind::gst;
  throw TtsError("unknown conditioning kind: " + s);
}

void ConditioningVector::validate(const CondDims& dims) const {
  const int want = dims.expected(kind);
  if (static_cast<int>(values.size()) != want)
    throw TtsError(std::string(cond_kind_name(kind)) + " vector has " +
                   std::to_string(values.size()) + " values, expected " +
                   std::to_string(want));
  for (double v : values)
    if (!std::isfinite(v))
      throw TtsError(std::string(cond_kind_name(kind)) +
                     " vector has non-finite value");
}

void SynthesisRequest::validate() const {
  if (text.empty()) throw SynthesisFailed("empty text");
}

// ------------------------------------------------------------ stub engine

Waveform StubEngine::synthesize(const SynthesisRequest& req) {
  req.validate();
  Waveform out;
  out.sample_rate_hz = kSampleRate;
  out.samples.reserve(req.text.size() * kSamplesPerChar);
  std::mt19937_64 rng(stable_hash64(req.seed, req.text));
  for (unsigned char c : req.text) {
    const double freq = 180.0 + 8.0 * c;
    const double phase0 = 2.0 * M_PI * uniform_unit(rng);
    for (int i = 0; i < kSamplesPerChar; ++i) {
      // Raised-cosine envelope keeps segment joins click-free.
      const double env =
          0.5 * (1.0 - std::cos(2.0 * M_PI * (i + 0.5) / kSamplesPerChar));
      const double t = static_cast<double>(i) / kSampleRate;
      out.samples.push_back(0.3 * env *
                            std::sin(2.0 * M_PI * freq * t + phase0));
    }
  }
  return out;
}

// ------------------------------------------------------------ http engine

HttpEngine::HttpEngine(const std::string& endpoint) : endpoint_(endpoint) {}

Waveform HttpEngine::synthesize(const SynthesisRequest& req) {
  req.validate();
  nlohmann::json body;
  body["text"] = req.text;
  body["seed"] = req.seed;
  body["xvector"] = req.xvector.values;
  body["gst"] = req.gst.values;

  httplib::Client client(endpoint_);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(60, 0);
  auto res = client.Post("/synthesize", body.dump(), "application/json");
  if (!res) throw EngineUnreachable(endpoint_);
  if (res->status != 200)
    throw SynthesisFailed("engine returned HTTP " +
                          std::to_string(res->status) + " for \"" + req.text +
                          "\"");
  try {
    const nlohmann::json j = nlohmann::json::parse(res->body);
    Waveform w;
    w.sample_rate_hz = j.at("sample_rate_hz").get<int>();
    w.samples = j.at("samples").get<std::vector<double>>();
    if (w.samples.empty()) throw SynthesisFailed("engine returned no samples");
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw SynthesisFailed(std::string("bad engine response: ") + e.what());
  }
}

std::unique_ptr<SynthesisEngine> make_engine(const std::string& spec) {
  if (spec == "stub") return std::make_unique<StubEngine>();
  return std::make_unique<HttpEngine>(spec);
}

// ---------------------------------------------------- conditioning table

ConditioningTable read_conditioning_table(const std::string& path,
                                          const CondDims& dims) {
  std::ifstream in(path);
  if (!in) throw TtsError("cannot open conditioning table: " + path);
  ConditioningTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const size_t t1 = line.find('\t');
    const size_t t2 = t1 == std::string::npos ? std::string::npos
                                              : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw TtsError("conditioning table line " + std::to_string(line_no) +
                     ": expected utt_id<TAB>kind<TAB>floats");
    ConditioningVector vec;
    const std::string utt_id = line.substr(0, t1);
    vec.kind = cond_kind_from_string(line.substr(t1 + 1, t2 - t1 - 1));
    vec.source_utt = utt_id;
    std::stringstream values(line.substr(t2 + 1));
    std::string item;
    while (std::getline(values, item, ',')) {
      try {
        size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        vec.values.push_back(v);
      } catch (const std::exception&) {
        throw TtsError("conditioning table line " + std::to_string(line_no) +
                       ": bad float \"" + item + "\"");
      }
    }
    vec.validate(dims);
    ConditioningEntry& entry = table[utt_id];
    if (vec.kind == CondKind::xvector) {
      entry.xvector = std::move(vec);
      entry.has_xvector = true;
    } else {
      entry.gst = std::move(vec);
      entry.has_gst = true;
    }
  }
  return table;
}

// -------------------------------------------------------------- options

void SnrRange::validate() const {
  if (std::isnan(lo_db) || std::isnan(hi_db) || lo_db > hi_db)
    throw TtsError("invalid SNR range");
  if (lo_db == -std::numeric_limits<double>::infinity())
    throw TtsError("SNR lower bound cannot be -inf");
  // +inf (no noise) is only meaningful as a degenerate range.
  if (std::isinf(hi_db) && lo_db != hi_db)
    throw TtsError("SNR range with an infinite upper bound must be inf:inf");
}

SnrRange parse_snr_range(const std::string& s) {
  const size_t colon = s.find(':');
  if (colon == std::string::npos)
    throw TtsError("SNR range must be LO:HI, got \"" + s + "\"");
  auto parse_one = [&s](const std::string& part) -> double {
    if (part == "inf" || part == "+inf")
      return std::numeric_limits<double>::infinity();
    try {
      size_t used = 0;
      const double v = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      return v;
    } catch (const std::exception&) {
      throw TtsError("bad SNR bound \"" + part + "\" in \"" + s + "\"");
    }
  };
  SnrRange r;
  r.lo_db = parse_one(s.substr(0, colon));
  r.hi_db = parse_one(s.substr(colon + 1));
  r.validate();
  return r;
}

// -------------------------------------------------------------- augment

TtsAugmentResult tts_augment(const Manifest& in, const ConditioningTable& cond,
                             SynthesisEngine* engine,
                             const std::vector<Waveform>& rir_pool,
                             const std::vector<Waveform>& noise_pool,
                             const TtsAugmentOptions& opts) {
  namespace fs = std::filesystem;
  opts.snr.validate();
  if (opts.perturb && (rir_pool.empty() || noise_pool.empty()))
    throw TtsError("perturbation enabled but RIR or noise pool is empty");
  fs::create_directories(opts.out_dir);

  const auto& records = in.records();
  std::vector<Waveform> synthesized(records.size());
  std::vector<RecordFailure> failures;
  std::vector<char> ok(records.size(), 0);

  // Synthesis runs sequentially: one in-flight request per engine.
  for (size_t i = 0; i < records.size(); ++i) {
    const ManifestRecord& rec = records[i];
    const auto it = cond.find(rec.utt_id);
    if (it == cond.end() || !it->second.has_xvector || !it->second.has_gst) {
      failures.push_back({rec.utt_id, "missing conditioning vectors"});
      continue;
    }
    SynthesisRequest req;
    req.text = rec.text;
    req.xvector = it->second.xvector;
    req.gst = it->second.gst;
    req.seed = stable_hash64(opts.seed, rec.utt_id);
    try {
      synthesized[i] = engine->synthesize(req);
      ok[i] = 1;
    } catch (const EngineUnreachable&) {
      throw;
    } catch (const std::exception& e) {
      failures.push_back({rec.utt_id, e.what()});
    }
  }

  // Perturbation and file writes are pure per record.
  std::vector<ManifestRecord> out(records.size());
  std::vector<RecordFailure> perturb_failures(records.size());
  std::vector<char> wrote(records.size(), 0);
  parallel_for(records.size(), opts.jobs, [&](size_t i) {
    if (!ok[i]) return;
    const ManifestRecord& rec = records[i];
    try {
      Waveform w = std::move(synthesized[i]);
      if (opts.perturb) {
        std::mt19937_64 rng(
            stable_hash64(stable_hash64(opts.seed, "perturb"), rec.utt_id));
        const Waveform& rir = rir_pool[rng() % rir_pool.size()];
        const Waveform& noise = noise_pool[rng() % noise_pool.size()];
        const double u = uniform_unit(rng);
        const double snr = opts.snr.lo_db == opts.snr.hi_db
                               ? opts.snr.lo_db
                               : opts.snr.lo_db +
                                     (opts.snr.hi_db - opts.snr.lo_db) * u;
        w = convolve_rir(w, rir);
        w = mix_at_snr(w, noise, snr);
      }
      ManifestRecord r;
      r.utt_id = rec.utt_id;
      r.audio_path = (fs::path(opts.out_dir) / (rec.utt_id + ".wav")).string();
      r.duration_s = w.duration_s();
      r.text = rec.text;
      r.source = Source::tts;
      r.speaker_id = rec.speaker_id;
      write_wav(r.audio_path, w);
      out[i] = std::move(r);
      wrote[i] = 1;
    } catch (const std::exception& e) {
      perturb_failures[i] = {rec.utt_id, e.what()};
    }
  });

  std::vector<ManifestRecord> kept;
  for (size_t i = 0; i < records.size(); ++i) {
    if (wrote[i]) {
      kept.push_back(std::move(out[i]));
    } else if (ok[i]) {
      failures.push_back(perturb_failures[i]);
    }
  }
  TtsAugmentResult result;
  result.manifest = Manifest::from_records(std::move(kept));
  result.failures = std::move(failures);
  return result;
}

std::vector<Waveform> load_wav_pool(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw TtsError("not a directory: " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  std::vector<Waveform> pool;
  pool.reserve(paths.size());
  for (const std::string& p : paths) pool.push_back(read_wav(p));
  return pool;
}

}  // namespace ttsaug
}  // namespace distaug
