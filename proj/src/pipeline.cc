// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distaug/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "distaug/cyclegan.hpp"
#include "distaug/dsp.hpp"
#include "distaug/manifest.hpp"
#include "distaug/parallel.hpp"
#include "distaug/pseudolabel.hpp"
#include "distaug/roomsim.hpp"
#include "distaug/seeding.hpp"
#include "distaug/specaug.hpp"
#include "distaug/ttsaug.hpp"
#include "distaug/wav.hpp"

namespace distaug {
namespace pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

const char* stage_kind_name(StageKind k) {
  switch (k) {
    case StageKind::speed: return "speed";
    case StageKind::rir: return "rir";
    case StageKind::tts_aug: return "tts_aug";
    case StageKind::mix: return "mix";
    case StageKind::cgan_train: return "cgan_train";
    case StageKind::cgan_apply: return "cgan_apply";
    case StageKind::pl_filter: return "pl_filter";
    case StageKind::specaug: return "specaug";
    case StageKind::assemble: return "assemble";
  }
  return "?";
}

StageKind stage_kind_from_string(const std::string& s) {
  for (StageKind k :
       {StageKind::speed, StageKind::rir, StageKind::tts_aug, StageKind::mix,
        StageKind::cgan_train, StageKind::cgan_apply, StageKind::pl_filter,
        StageKind::specaug, StageKind::assemble})
    if (s == stage_kind_name(k)) return k;
  throw ConfigInvalid("kind", "unknown stage kind \"" + s + "\"");
}

// ---------------------------------------------------------- validation

namespace {

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigInvalid(where + "." + key, "missing required field");
  return j.at(key);
}

std::string need_str(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_string() || v.get<std::string>().empty())
    throw ConfigInvalid(where + "." + key, "expected a non-empty string");
  return v.get<std::string>();
}

double need_num(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number())
    throw ConfigInvalid(where + "." + key, "expected a number");
  return v.get<double>();
}

int opt_int(const json& j, const char* key, int fallback,
            const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    throw ConfigInvalid(where + "." + key, "expected an integer");
  return j.at(key).get<int>();
}

std::string opt_str(const json& j, const char* key,
                    const std::string& fallback) {
  return j.contains(key) ? j.at(key).get<std::string>() : fallback;
}

std::vector<double> need_factors(const json& j, const std::string& where) {
  const json& v = need(j, "factors", where);
  if (!v.is_array() || v.empty())
    throw ConfigInvalid(where + ".factors", "expected a non-empty array");
  std::vector<double> out;
  for (const auto& f : v) {
    if (!f.is_number())
      throw ConfigInvalid(where + ".factors", "expected numbers");
    const double d = f.get<double>();
    if (d < 0.5 || d > 2.0)
      throw ConfigInvalid(where + ".factors",
                          "factor " + std::to_string(d) +
                              " outside [0.5, 2.0]");
    out.push_back(d);
  }
  return out;
}

ttsaug::SnrRange parse_snr_field(const json& j, const std::string& where,
                                 const std::string& fallback) {
  const std::string s = opt_str(j, "snr", fallback);
  try {
    return ttsaug::parse_snr_range(s);
  } catch (const std::exception& e) {
    throw ConfigInvalid(where + ".snr", e.what());
  }
}

std::array<double, 3> triple(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3)
    throw ConfigInvalid(where, "expected an array of 3 numbers");
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) {
    if (!v[static_cast<size_t>(i)].is_number())
      throw ConfigInvalid(where, "expected numbers");
    out[static_cast<size_t>(i)] = v[static_cast<size_t>(i)].get<double>();
  }
  return out;
}

RoomRanges ranges_from_json(const json& j, const std::string& where) {
  RoomRanges r;
  if (j.contains("dims_min")) r.dims_min = triple(j.at("dims_min"), where + ".dims_min");
  if (j.contains("dims_max")) r.dims_max = triple(j.at("dims_max"), where + ".dims_max");
  if (j.contains("absorption_min"))
    r.absorption_min = need_num(j, "absorption_min", where);
  if (j.contains("absorption_max"))
    r.absorption_max = need_num(j, "absorption_max", where);
  r.max_order_min = opt_int(j, "max_order_min", r.max_order_min, where);
  r.max_order_max = opt_int(j, "max_order_max", r.max_order_max, where);
  r.sample_rate_hz = opt_int(j, "sample_rate_hz", r.sample_rate_hz, where);
  if (j.contains("speed_of_sound_mps"))
    r.speed_of_sound_mps = need_num(j, "speed_of_sound_mps", where);
  if (j.contains("wall_margin_m"))
    r.wall_margin_m = need_num(j, "wall_margin_m", where);
  if (j.contains("min_src_mic_dist_m"))
    r.min_src_mic_dist_m = need_num(j, "min_src_mic_dist_m", where);
  try {
    r.validate();
  } catch (const std::exception& e) {
    throw ConfigInvalid(where, e.what());
  }
  return r;
}

RoomRanges load_stage_ranges(const json& p, const std::string& where) {
  if (p.contains("ranges") && p.contains("ranges_file"))
    throw ConfigInvalid(where, "give either ranges or ranges_file, not both");
  if (p.contains("ranges_file")) {
    const std::string path = need_str(p, "ranges_file", where);
    std::ifstream in(path);
    if (!in)
      throw ConfigInvalid(where + ".ranges_file", "cannot open " + path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConfigInvalid(where + ".ranges_file", e.what());
    }
    return ranges_from_json(j, where + ".ranges_file");
  }
  if (p.contains("ranges"))
    return ranges_from_json(p.at("ranges"), where + ".ranges");
  return RoomRanges{};
}

MaskPolicy policy_from_json(const json& j, const std::string& where) {
  MaskPolicy p;
  p.num_freq_masks = opt_int(j, "num_freq_masks", p.num_freq_masks, where);
  p.max_freq_width = opt_int(j, "max_freq_width", p.max_freq_width, where);
  p.num_time_masks = opt_int(j, "num_time_masks", p.num_time_masks, where);
  p.max_time_width = opt_int(j, "max_time_width", p.max_time_width, where);
  p.warp_window = opt_int(j, "warp_window", p.warp_window, where);
  if (p.num_freq_masks < 0 || p.max_freq_width < 0 || p.num_time_masks < 0 ||
      p.max_time_width < 0 || p.warp_window < 0)
    throw ConfigInvalid(where, "mask policy values must be non-negative");
  if (j.contains("fill")) {
    try {
      p.fill = mask_fill_from_string(j.at("fill").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigInvalid(where + ".fill", e.what());
    }
  }
  return p;
}

StftConfig stft_from_json(const json& j, const std::string& where) {
  StftConfig c;
  c.win_length = opt_int(j, "win_length", c.win_length, where);
  c.hop_length = opt_int(j, "hop_length", c.hop_length, where);
  c.fft_size = opt_int(j, "fft_size", c.fft_size, where);
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw ConfigInvalid(where, e.what());
  }
  return c;
}

cyclegan::GanConfig load_gan_config(const json& p, const std::string& where) {
  if (p.contains("gan") && p.contains("config"))
    throw ConfigInvalid(where, "give either gan or config, not both");
  try {
    if (p.contains("gan")) return cyclegan::GanConfig::from_json(p.at("gan"));
    const std::string path = need_str(p, "config", where);
    return cyclegan::GanConfig::from_file(path);
  } catch (const ConfigInvalid&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigInvalid(where, e.what());
  }
}

void validate_stage(const StageConfig& stage, const std::string& where) {
  const json& p = stage.params;
  switch (stage.kind) {
    case StageKind::speed:
      need_str(p, "in", where);
      need_str(p, "out", where);
      need_str(p, "out_dir", where);
      need_factors(p, where);
      break;
    case StageKind::rir: {
      need_str(p, "out_dir", where);
      const double count = need_num(p, "count", where);
      if (count < 1 || count != std::floor(count))
        throw ConfigInvalid(where + ".count", "expected a positive integer");
      load_stage_ranges(p, where);
      break;
    }
    case StageKind::tts_aug: {
      need_str(p, "in", where);
      need_str(p, "cond", where);
      need_str(p, "engine", where);
      need_str(p, "out_dir", where);
      need_str(p, "out", where);
      parse_snr_field(p, where, "10:20");
      const bool perturb = p.value("perturb", true);
      if (perturb) {
        need_str(p, "rirs", where);
        need_str(p, "noise", where);
      }
      break;
    }
    case StageKind::mix:
      need_str(p, "in", where);
      need_str(p, "out", where);
      need_str(p, "out_dir", where);
      need_str(p, "noise", where);
      parse_snr_field(p, where, "10:20");
      break;
    case StageKind::cgan_train:
      need_str(p, "clean_dir", where);
      need_str(p, "noisy_dir", where);
      need_str(p, "out", where);
      load_gan_config(p, where);
      break;
    case StageKind::cgan_apply:
      need_str(p, "model", where);
      need_str(p, "in", where);
      need_str(p, "out_dir", where);
      need_str(p, "out", where);
      break;
    case StageKind::pl_filter: {
      need_str(p, "refs", where);
      need_str(p, "hyps", where);
      need_str(p, "out", where);
      const json& d = need(p, "delta", where);
      double delta = 0.0;
      if (d.is_string()) {
        try {
          delta = parse_delta(d.get<std::string>());
        } catch (const std::exception& e) {
          throw ConfigInvalid(where + ".delta", e.what());
        }
      } else if (d.is_number()) {
        delta = d.get<double>();
      } else {
        throw ConfigInvalid(where + ".delta", "expected number or \"inf\"");
      }
      if (delta < 0.0 || std::isnan(delta))
        throw ConfigInvalid(where + ".delta", "must be >= 0");
      break;
    }
    case StageKind::specaug:
      need_str(p, "in", where);
      need_str(p, "out_dir", where);
      if (p.contains("policy")) policy_from_json(p.at("policy"), where + ".policy");
      if (p.contains("stft")) stft_from_json(p.at("stft"), where + ".stft");
      break;
    case StageKind::assemble:
      need_str(p, "orig", where);
      need_str(p, "tts", where);
      need_str(p, "cgan", where);
      need_str(p, "pl", where);
      need_str(p, "out", where);
      break;
  }
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig cfg;
  if (!j.is_object()) throw ConfigInvalid("$", "config root must be an object");
  if (j.contains("root_seed")) {
    if (!j.at("root_seed").is_number_unsigned() &&
        !j.at("root_seed").is_number_integer())
      throw ConfigInvalid("root_seed", "expected a non-negative integer");
    cfg.root_seed = j.at("root_seed").get<uint64_t>();
  }
  cfg.jobs = opt_int(j, "jobs", 1, "$");
  if (cfg.jobs < 1) throw ConfigInvalid("jobs", "must be >= 1");
  cfg.report_path = opt_str(j, "report_path", "");
  std::set<std::string> names;
  if (j.contains("stages")) {
    if (!j.at("stages").is_array())
      throw ConfigInvalid("stages", "expected an array");
    size_t idx = 0;
    for (const json& js : j.at("stages")) {
      const std::string where = "stages[" + std::to_string(idx) + "]";
      if (!js.is_object()) throw ConfigInvalid(where, "expected an object");
      StageConfig stage;
      stage.kind = stage_kind_from_string(need_str(js, "kind", where));
      stage.name = opt_str(js, "name",
                           std::string(stage_kind_name(stage.kind)) + "[" +
                               std::to_string(idx) + "]");
      stage.params = js;
      if (!names.insert(stage.name).second)
        throw ConfigInvalid(where + ".name",
                            "duplicate stage name \"" + stage.name + "\"");
      validate_stage(stage, where);
      cfg.stages.push_back(std::move(stage));
      ++idx;
    }
  }
  return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("$", "cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigInvalid("$", std::string("JSON parse error: ") + e.what());
  }
  return from_json(j);
}

// ------------------------------------------------------------ artifacts

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StageFailed("checksum", "cannot open " + path);
  uint64_t h = 14695981039346656037ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(hex);
}

void write_feature_file(const Matrix& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw StageFailed("feature", "cannot open for writing: " + path);
  os.write("DAUGFT01", 8);
  const int32_t rows = m.rows, cols = m.cols;
  os.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  os.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  os.write(reinterpret_cast<const char*>(m.v.data()),
           static_cast<std::streamsize>(m.v.size() * sizeof(double)));
  if (!os) throw StageFailed("feature", "write failed: " + path);
}

Matrix read_feature_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw StageFailed("feature", "cannot open " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::string(magic, 8) != "DAUGFT01")
    throw StageFailed("feature", "bad magic in " + path);
  int32_t rows = 0, cols = 0;
  is.read(reinterpret_cast<char*>(&rows), sizeof rows);
  is.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!is || rows < 0 || cols < 0)
    throw StageFailed("feature", "bad header in " + path);
  Matrix m(rows, cols);
  is.read(reinterpret_cast<char*>(m.v.data()),
          static_cast<std::streamsize>(m.v.size() * sizeof(double)));
  if (!is) throw StageFailed("feature", "truncated data in " + path);
  return m;
}

// ------------------------------------------------------------ executors

namespace {

json manifest_artifact(const std::string& path, const Manifest& m) {
  return json{{"path", path},
              {"records", m.size()},
              {"hours", m.total_hours()},
              {"checksum", file_checksum(path)}};
}

json manifest_artifact(const std::string& path) {
  return manifest_artifact(path, read_manifest(path));
}

std::string format_factor(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", f);
  return std::string(buf);
}

struct StageContext {
  uint64_t seed = 0;
  int jobs = 1;
};

json exec_speed(const json& p, const StageContext& ctx) {
  const Manifest in = read_manifest(p.at("in").get<std::string>());
  const std::vector<double> factors = need_factors(p, "speed");
  const std::string out_dir = p.at("out_dir").get<std::string>();
  fs::create_directories(out_dir);
  const auto& recs = in.records();
  const size_t per = factors.size();
  std::vector<ManifestRecord> out(recs.size() * per);
  parallel_for(recs.size(), ctx.jobs, [&](size_t i) {
    const ManifestRecord& rec = recs[i];
    const Waveform w = read_wav(rec.audio_path);
    for (size_t fi = 0; fi < per; ++fi) {
      const double f = factors[fi];
      ManifestRecord r = rec;
      if (f != 1.0) {
        const Waveform sp = speed_perturb(w, f);
        r.utt_id = rec.utt_id + "-sp" + format_factor(f);
        r.audio_path =
            (fs::path(out_dir) / (r.utt_id + ".wav")).string();
        r.duration_s = sp.duration_s();
        write_wav(r.audio_path, sp);
      }
      out[i * per + fi] = std::move(r);
    }
  });
  Manifest result = Manifest::from_records(std::move(out));
  const std::string out_path = p.at("out").get<std::string>();
  write_manifest(result, out_path);
  json rep;
  rep["inputs"] = {manifest_artifact(p.at("in").get<std::string>(), in)};
  rep["outputs"] = {manifest_artifact(out_path, result)};
  return rep;
}

json exec_rir(const json& p, const StageContext& ctx) {
  const RoomRanges ranges = load_stage_ranges(p, "rir");
  const int count = static_cast<int>(p.at("count").get<double>());
  const std::string out_dir = p.at("out_dir").get<std::string>();
  fs::create_directories(out_dir);
  std::vector<std::string> paths(static_cast<size_t>(count));
  parallel_for(static_cast<size_t>(count), ctx.jobs, [&](size_t i) {
    const RoomConfig room =
        sample_room(stable_hash64(ctx.seed, "rir-" + std::to_string(i)),
                    ranges);
    const Waveform rir = simulate_rir(room);
    char name[32];
    std::snprintf(name, sizeof name, "rir_%04zu.wav", i);
    paths[i] = (fs::path(out_dir) / name).string();
    write_wav(paths[i], rir, WavEncoding::float32);
  });
  uint64_t h = 14695981039346656037ull;
  for (const std::string& path : paths) {
    const std::string c = file_checksum(path);
    for (char ch : c) {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  json rep;
  rep["outputs"] = {
      json{{"path", out_dir}, {"files", count}, {"checksum", std::string(hex)}}};
  return rep;
}

json exec_tts_aug(const json& p, const StageContext& ctx) {
  const Manifest in = read_manifest(p.at("in").get<std::string>());
  ttsaug::CondDims dims;
  if (p.contains("cond_dims")) {
    dims.xvector = opt_int(p.at("cond_dims"), "xvector", dims.xvector, "tts_aug");
    dims.gst = opt_int(p.at("cond_dims"), "gst", dims.gst, "tts_aug");
  }
  const auto table =
      ttsaug::read_conditioning_table(p.at("cond").get<std::string>(), dims);
  auto engine = ttsaug::make_engine(p.at("engine").get<std::string>());
  ttsaug::TtsAugmentOptions opts;
  opts.perturb = p.value("perturb", true);
  opts.snr = parse_snr_field(p, "tts_aug", "10:20");
  opts.seed = ctx.seed;
  opts.out_dir = p.at("out_dir").get<std::string>();
  opts.jobs = ctx.jobs;
  std::vector<Waveform> rirs, noise;
  if (opts.perturb) {
    rirs = ttsaug::load_wav_pool(p.at("rirs").get<std::string>());
    noise = ttsaug::load_wav_pool(p.at("noise").get<std::string>());
  }
  const auto result =
      ttsaug::tts_augment(in, table, engine.get(), rirs, noise, opts);
  const std::string out_path = p.at("out").get<std::string>();
  write_manifest(result.manifest, out_path);
  json rep;
  rep["inputs"] = {manifest_artifact(p.at("in").get<std::string>(), in)};
  rep["outputs"] = {manifest_artifact(out_path, result.manifest)};
  json fails = json::array();
  for (const auto& f : result.failures)
    fails.push_back({{"utt_id", f.utt_id}, {"error", f.message}});
  rep["failures"] = fails;
  return rep;
}

json exec_mix(const json& p, const StageContext& ctx) {
  const Manifest in = read_manifest(p.at("in").get<std::string>());
  const std::string out_dir = p.at("out_dir").get<std::string>();
  fs::create_directories(out_dir);
  const auto noise = ttsaug::load_wav_pool(p.at("noise").get<std::string>());
  if (noise.empty()) throw StageFailed("mix", "noise pool is empty");
  std::vector<Waveform> rirs;
  if (p.contains("rirs")) {
    rirs = ttsaug::load_wav_pool(p.at("rirs").get<std::string>());
    if (rirs.empty()) throw StageFailed("mix", "rir pool is empty");
  }
  const ttsaug::SnrRange snr = parse_snr_field(p, "mix", "10:20");
  const auto& recs = in.records();
  std::vector<ManifestRecord> out(recs.size());
  parallel_for(recs.size(), ctx.jobs, [&](size_t i) {
    const ManifestRecord& rec = recs[i];
    std::mt19937_64 rng(stable_hash64(ctx.seed, rec.utt_id));
    Waveform w = read_wav(rec.audio_path);
    if (!rirs.empty()) w = convolve_rir(w, rirs[rng() % rirs.size()]);
    const Waveform& nz = noise[rng() % noise.size()];
    const double u = uniform_unit(rng);
    const double target = snr.lo_db == snr.hi_db
                              ? snr.lo_db
                              : snr.lo_db + (snr.hi_db - snr.lo_db) * u;
    w = mix_at_snr(w, nz, target);
    ManifestRecord r = rec;
    r.audio_path = (fs::path(out_dir) / (rec.utt_id + ".wav")).string();
    r.duration_s = w.duration_s();
    write_wav(r.audio_path, w);
    out[i] = std::move(r);
  });
  Manifest result = Manifest::from_records(std::move(out));
  const std::string out_path = p.at("out").get<std::string>();
  write_manifest(result, out_path);
  json rep;
  rep["inputs"] = {manifest_artifact(p.at("in").get<std::string>(), in)};
  rep["outputs"] = {manifest_artifact(out_path, result)};
  return rep;
}

json exec_cgan_train(const json& p, const StageContext& ctx) {
  const cyclegan::GanConfig cfg = load_gan_config(p, "cgan_train");
  NormStats clean_stats, noisy_stats;
  const auto clean = cyclegan::load_patch_corpus(
      p.at("clean_dir").get<std::string>(), cfg, &clean_stats);
  const auto noisy = cyclegan::load_patch_corpus(
      p.at("noisy_dir").get<std::string>(), cfg, &noisy_stats);
  cyclegan::GanModel model =
      cyclegan::build_gan_model(cfg, stable_hash64(ctx.seed, "init"));
  model.clean_stats = clean_stats;
  model.noisy_stats = noisy_stats;
  cyclegan::TrainSchedule sched;
  sched.steps = cfg.steps;
  sched.seed = stable_hash64(ctx.seed, "train");
  sched.checkpoint_every = cfg.checkpoint_every;
  sched.checkpoint_path = p.at("out").get<std::string>();
  sched.history_csv_path = sched.checkpoint_path + ".history.csv";
  const auto result = cyclegan::train_cyclegan(&model, clean, noisy, sched);
  json rep;
  rep["outputs"] = {json{{"path", sched.checkpoint_path},
                         {"checksum", file_checksum(sched.checkpoint_path)}},
                    json{{"path", sched.history_csv_path},
                         {"checksum", file_checksum(sched.history_csv_path)}}};
  rep["steps"] = result.history.size();
  if (!result.history.empty()) {
    const auto& last = result.history.back();
    rep["final_loss"] = {{"adv_G", last.adv_g},
                         {"adv_F", last.adv_f},
                         {"cyc", last.cyc},
                         {"total", last.total}};
  }
  return rep;
}

json exec_cgan_apply(const json& p, const StageContext& ctx) {
  cyclegan::Checkpoint ck =
      cyclegan::load_checkpoint(p.at("model").get<std::string>());
  const Manifest in = read_manifest(p.at("in").get<std::string>());
  const auto result = cyclegan::augment_manifest_cgan(
      ck.model, in, p.at("out_dir").get<std::string>(), ctx.jobs);
  const std::string out_path = p.at("out").get<std::string>();
  write_manifest(result.manifest, out_path);
  json rep;
  rep["inputs"] = {manifest_artifact(p.at("in").get<std::string>(), in)};
  rep["outputs"] = {manifest_artifact(out_path, result.manifest)};
  json fails = json::array();
  for (const auto& f : result.failures)
    fails.push_back({{"utt_id", f.utt_id}, {"error", f.message}});
  rep["failures"] = fails;
  return rep;
}

json exec_pl_filter(const json& p, const StageContext&) {
  const Manifest refs = read_manifest(p.at("refs").get<std::string>());
  const auto hyps = read_hypotheses(p.at("hyps").get<std::string>());
  const json& d = p.at("delta");
  const double delta = d.is_string() ? parse_delta(d.get<std::string>())
                                     : d.get<double>();
  CerOptions opts;
  opts.uppercase = p.value("uppercase", true);
  opts.count_spaces = p.value("count_spaces", true);
  const auto result = filter_pseudo_labels(refs, hyps, delta,
                                           p.value("exclude_exact", false),
                                           opts);
  const std::string out_path = p.at("out").get<std::string>();
  write_manifest(result.manifest, out_path);
  json rep;
  rep["inputs"] = {manifest_artifact(p.at("refs").get<std::string>(), refs)};
  rep["outputs"] = {manifest_artifact(out_path, result.manifest)};
  rep["kept"] = result.summary.kept;
  rep["dropped"] = result.summary.dropped;
  rep["missing"] = result.summary.missing.size();
  return rep;
}

json exec_specaug(const json& p, const StageContext& ctx) {
  const Manifest in = read_manifest(p.at("in").get<std::string>());
  const MaskPolicy policy = p.contains("policy")
                                ? policy_from_json(p.at("policy"), "specaug")
                                : MaskPolicy{};
  const StftConfig stft_cfg = p.contains("stft")
                                  ? stft_from_json(p.at("stft"), "specaug")
                                  : StftConfig{};
  const std::string out_dir = p.at("out_dir").get<std::string>();
  fs::create_directories(out_dir);
  const auto& recs = in.records();
  std::vector<std::string> feat_paths(recs.size());
  parallel_for(recs.size(), ctx.jobs, [&](size_t i) {
    const ManifestRecord& rec = recs[i];
    const Waveform w = read_wav(rec.audio_path);
    const Matrix feat = log_magnitude(stft(w, stft_cfg));
    const Matrix masked =
        apply_specaugment(feat, policy, stable_hash64(ctx.seed, rec.utt_id));
    feat_paths[i] = (fs::path(out_dir) / (rec.utt_id + ".feat")).string();
    write_feature_file(masked, feat_paths[i]);
  });
  const std::string list_path = (fs::path(out_dir) / "feats.list").string();
  std::ofstream list(list_path, std::ios::trunc);
  for (size_t i = 0; i < recs.size(); ++i)
    list << recs[i].utt_id << '\t' << feat_paths[i] << '\n';
  list.close();
  json rep;
  rep["inputs"] = {manifest_artifact(p.at("in").get<std::string>(), in)};
  rep["outputs"] = {json{{"path", list_path},
                         {"files", recs.size()},
                         {"checksum", file_checksum(list_path)}}};
  return rep;
}

json exec_assemble(const json& p, const StageContext&) {
  const Manifest orig = read_manifest(p.at("orig").get<std::string>());
  const Manifest tts = read_manifest(p.at("tts").get<std::string>());
  const Manifest cgan = read_manifest(p.at("cgan").get<std::string>());
  const Manifest pl = read_manifest(p.at("pl").get<std::string>());
  const Manifest combined = assemble_combined(orig, tts, cgan, pl);
  const std::string out_path = p.at("out").get<std::string>();
  write_manifest(combined, out_path);
  json rep;
  rep["inputs"] = {manifest_artifact(p.at("orig").get<std::string>(), orig),
                   manifest_artifact(p.at("tts").get<std::string>(), tts),
                   manifest_artifact(p.at("cgan").get<std::string>(), cgan),
                   manifest_artifact(p.at("pl").get<std::string>(), pl)};
  rep["outputs"] = {manifest_artifact(out_path, combined)};
  const auto counts = combined.provenance_counts();
  rep["provenance"] = {{"orig", counts[0]},
                       {"tts", counts[1]},
                       {"cgan", counts[2]},
                       {"pl", counts[3]}};
  return rep;
}

json exec_stage(const StageConfig& stage, const StageContext& ctx) {
  switch (stage.kind) {
    case StageKind::speed: return exec_speed(stage.params, ctx);
    case StageKind::rir: return exec_rir(stage.params, ctx);
    case StageKind::tts_aug: return exec_tts_aug(stage.params, ctx);
    case StageKind::mix: return exec_mix(stage.params, ctx);
    case StageKind::cgan_train: return exec_cgan_train(stage.params, ctx);
    case StageKind::cgan_apply: return exec_cgan_apply(stage.params, ctx);
    case StageKind::pl_filter: return exec_pl_filter(stage.params, ctx);
    case StageKind::specaug: return exec_specaug(stage.params, ctx);
    case StageKind::assemble: return exec_assemble(stage.params, ctx);
  }
  throw StageFailed(stage.name, "unknown stage kind");
}

void write_report(const json& report, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw StageFailed("report", "cannot open " + path);
  os << report.dump(2) << '\n';
}

}  // namespace

json run_single_stage(StageKind kind, const json& params, uint64_t seed,
                      int jobs) {
  StageConfig stage;
  stage.kind = kind;
  stage.name = stage_kind_name(kind);
  stage.params = params;
  validate_stage(stage, stage.name);
  StageContext ctx;
  ctx.seed = seed;
  ctx.jobs = jobs < 1 ? 1 : jobs;
  return exec_stage(stage, ctx);
}

json run(const PipelineConfig& config) {
  uint64_t root = config.root_seed;
  std::string seed_source = "config";
  if (const char* env = std::getenv("DISTAUG_SEED")) {
    try {
      size_t used = 0;
      root = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw ConfigInvalid("DISTAUG_SEED",
                          std::string("not a valid seed: \"") + env + "\"");
    }
    seed_source = "env";
  }

  json report;
  report["root_seed"] = root;
  report["seed_source"] = seed_source;
  report["jobs"] = config.jobs;
  report["stages"] = json::array();

  for (const StageConfig& stage : config.stages) {
    StageContext ctx;
    ctx.seed = stable_hash64(root, stage.name);
    ctx.jobs = config.jobs;
    json entry;
    entry["name"] = stage.name;
    entry["kind"] = stage_kind_name(stage.kind);
    entry["seed"] = ctx.seed;
    try {
      const json frag = exec_stage(stage, ctx);
      entry.update(frag);
      entry["status"] = "ok";
      report["stages"].push_back(entry);
    } catch (const std::exception& e) {
      entry["status"] = "failed";
      entry["error"] = e.what();
      report["stages"].push_back(entry);
      if (!config.report_path.empty()) write_report(report, config.report_path);
      throw StageFailed(stage.name, e.what());
    }
  }
  if (!config.report_path.empty()) write_report(report, config.report_path);
  return report;
}

}  // namespace pipeline
}  // namespace distaug
