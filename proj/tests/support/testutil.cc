// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "testutil.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "distaug/seeding.hpp"
#include "distaug/wav.hpp"

namespace fs = std::filesystem;

using distaug::Manifest;
using distaug::ManifestRecord;
using distaug::Source;
using distaug::Waveform;

namespace testutil {

std::string temp_dir(const std::string& hint) {
  static std::atomic<int> counter{0};
  const int id = counter.fetch_add(1);
  fs::path root = fs::temp_directory_path() /
                  ("distaug-tests-" + std::to_string(::getpid()));
  fs::path dir = root / (hint + "-" + std::to_string(id));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::trunc | std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << content;
}

std::string read_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Waveform sine(double freq_hz, size_t n, int fs, double amp, double phase) {
  Waveform w;
  w.sample_rate_hz = fs;
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    w.samples[i] =
        amp * std::sin(2.0 * M_PI * freq_hz * static_cast<double>(i) / fs +
                       phase);
  return w;
}

Waveform white_noise(uint64_t seed, size_t n, int fs, double amp) {
  std::mt19937_64 rng(seed);
  Waveform w;
  w.sample_rate_hz = fs;
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    w.samples[i] = amp * (2.0 * distaug::uniform_unit(rng) - 1.0);
  return w;
}

ManifestRecord record(const std::string& id, const std::string& path,
                      double dur_s, const std::string& text, Source source,
                      const std::string& speaker) {
  ManifestRecord r;
  r.utt_id = id;
  r.audio_path = path;
  r.duration_s = dur_s;
  r.text = text;
  r.source = source;
  r.speaker_id = speaker;
  return r;
}

namespace {

// Tone bins of the toy domains, one per band of the 33-bin toy split
// (bands are bins 0-10, 11-21, 22-32 at fft 64).
constexpr double kToyToneHz[3] = {750.0, 3000.0, 5500.0};
constexpr double kToyToneAmp[3] = {0.35, 0.22, 0.14};

Waveform toy_tones(uint64_t seed, size_t n, int fs) {
  std::mt19937_64 rng(seed);
  Waveform w;
  w.sample_rate_hz = fs;
  w.samples.assign(n, 0.0);
  for (int t = 0; t < 3; ++t) {
    const double jitter = 0.8 + 0.4 * distaug::uniform_unit(rng);
    const double phase = 2.0 * M_PI * distaug::uniform_unit(rng);
    const double amp = kToyToneAmp[t] * jitter;
    for (size_t i = 0; i < n; ++i)
      w.samples[i] += amp * std::sin(2.0 * M_PI * kToyToneHz[t] *
                                         static_cast<double>(i) / fs +
                                     phase);
  }
  return w;
}

}  // namespace

Waveform toy_clean_wave(uint64_t seed, size_t n, int fs) {
  return toy_tones(distaug::stable_hash64(seed, "clean"), n, fs);
}

Waveform toy_noisy_wave(uint64_t seed, size_t n, int fs) {
  Waveform w = toy_tones(distaug::stable_hash64(seed, "clean"), n, fs);
  // One-pole lowpass tilts the tones down with frequency.
  const double a = 0.55;
  double state = 0.0;
  for (double& s : w.samples) {
    state = a * state + (1.0 - a) * s;
    s = state;
  }
  // White noise floor at 8 dB SNR against the filtered signal.
  std::mt19937_64 rng(distaug::stable_hash64(seed, "floor"));
  double p_sig = 0.0;
  for (double s : w.samples) p_sig += s * s;
  p_sig /= static_cast<double>(n);
  std::vector<double> noise(n);
  double p_noise = 0.0;
  for (size_t i = 0; i < n; ++i) {
    noise[i] = 2.0 * distaug::uniform_unit(rng) - 1.0;
    p_noise += noise[i] * noise[i];
  }
  p_noise /= static_cast<double>(n);
  const double g = std::sqrt(p_sig / (p_noise * std::pow(10.0, 8.0 / 10.0)));
  for (size_t i = 0; i < n; ++i) w.samples[i] += g * noise[i];
  return w;
}

void make_toy_domains(const std::string& clean_dir,
                      const std::string& noisy_dir, int files_per_domain,
                      double seconds, uint64_t seed) {
  fs::create_directories(clean_dir);
  fs::create_directories(noisy_dir);
  const int fs_hz = 16000;
  const size_t n = static_cast<size_t>(seconds * fs_hz);
  for (int i = 0; i < files_per_domain; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "dom_%03d.wav", i);
    distaug::write_wav(
        (fs::path(clean_dir) / name).string(),
        toy_clean_wave(distaug::stable_hash64(seed, "c" + std::to_string(i)),
                       n, fs_hz));
    distaug::write_wav(
        (fs::path(noisy_dir) / name).string(),
        toy_noisy_wave(distaug::stable_hash64(seed, "n" + std::to_string(i)),
                       n, fs_hz));
  }
}

distaug::cyclegan::GanConfig toy_gan_config() {
  distaug::cyclegan::GanConfig cfg;
  cfg.stft.win_length = 64;
  cfg.stft.hop_length = 32;
  cfg.stft.fft_size = 64;
  cfg.sample_rate_hz = 16000;
  cfg.patch_frames = 16;
  cfg.num_bands_m = 3;
  cfg.num_bands_n = 3;
  cfg.lambda_cyc = 10.0;
  cfg.loss = distaug::cyclegan::GanLossVariant::least_squares;
  cfg.gen_base_width = 8;
  cfg.gen_downsamples = 1;
  cfg.gen_resblocks = 2;
  cfg.disc_base_width = 8;
  cfg.disc_layers = 3;
  cfg.disc_kernel = 4;
  cfg.adam.learning_rate = 1e-3;
  cfg.batch_size = 2;
  cfg.steps = 800;
  return cfg;
}

ToyCorpus make_toy_corpus(const std::string& dir, int num_utts,
                          double utt_seconds, uint64_t seed) {
  static const char* kPhrases[] = {
      "THE METER SHOWS A STEADY READING",
      "PLEASE CLOSE THE SECOND VALVE",
      "ALL FOUR CHANNELS ARE ACTIVE NOW",
      "REPEAT THE LAST MEASUREMENT TWICE",
      "THE ROOM STAYS QUIET AFTER DARK",
  };
  constexpr int kNumPhrases = 5;

  ToyCorpus c;
  c.dir = dir;
  fs::create_directories(dir);
  const std::string wav_dir = (fs::path(dir) / "wav").string();
  fs::create_directories(wav_dir);
  c.noise_dir = (fs::path(dir) / "noise").string();
  fs::create_directories(c.noise_dir);

  const int fs_hz = 16000;
  const size_t n = static_cast<size_t>(utt_seconds * fs_hz);
  std::vector<ManifestRecord> recs;
  std::ostringstream cond, hyps;
  std::mt19937_64 rng(seed);

  for (int i = 0; i < num_utts; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "utt%04d", i);
    const std::string path = (fs::path(wav_dir) / (std::string(id) + ".wav"))
                                 .string();
    const double f0 = 200.0 + 97.0 * (i % 23);
    Waveform w = sine(f0, n, fs_hz, 0.35,
                      2.0 * M_PI * distaug::uniform_unit(rng));
    const Waveform h = sine(2.0 * f0, n, fs_hz, 0.15);
    for (size_t k = 0; k < n; ++k) w.samples[k] += h.samples[k];
    distaug::write_wav(path, w);

    const std::string text = kPhrases[i % kNumPhrases];
    recs.push_back(record(id, path, utt_seconds, text, Source::orig,
                          "spk" + std::to_string(i % 4)));

    // Small opaque conditioning vectors (dims 8 and 4).
    cond << id << "\txvector";
    for (int d = 0; d < 8; ++d)
      cond << (d == 0 ? '\t' : ',') << 0.125 * ((i + d) % 8);
    cond << '\n' << id << "\tgst";
    for (int d = 0; d < 4; ++d)
      cond << (d == 0 ? '\t' : ',') << 0.25 * ((i + d) % 4);
    cond << '\n';

    // Hypotheses stratified by error rate; the last utterance has none.
    if (i == num_utts - 1) continue;
    std::string hyp = text;
    switch (i % 4) {
      case 0:  // exact
        break;
      case 1:  // one substitution, CER ~ 3-4%
        hyp[0] = 'X';
        break;
      case 2:  // ~40% of characters wrong
        for (size_t k = 0; k < hyp.size(); k += 5) {
          hyp[k] = 'Q';
          if (k + 1 < hyp.size()) hyp[k + 1] = 'Z';
        }
        break;
      default:  // doubled text, CER > 100 via insertions
        hyp = text + " " + text;
        break;
    }
    hyps << id << '\t' << hyp << '\n';
  }

  for (int i = 0; i < 2; ++i) {
    distaug::write_wav(
        (fs::path(c.noise_dir) / ("noise" + std::to_string(i) + ".wav"))
            .string(),
        white_noise(distaug::stable_hash64(seed, "nz" + std::to_string(i)),
                    static_cast<size_t>(6 * fs_hz), fs_hz, 0.2));
  }

  c.manifest = Manifest::from_records(std::move(recs));
  c.manifest_path = (fs::path(dir) / "orig.jsonl").string();
  distaug::write_manifest(c.manifest, c.manifest_path);
  c.cond_path = (fs::path(dir) / "cond.tsv").string();
  write_text(c.cond_path, cond.str());
  c.hyps_path = (fs::path(dir) / "hyps.tsv").string();
  write_text(c.hyps_path, hyps.str());
  return c;
}

std::vector<double> band_profile(const std::vector<Waveform>& wavs,
                                 const distaug::cyclegan::GanConfig& cfg) {
  distaug::cyclegan::SubbandSplit split;
  split.num_bands_m = cfg.num_bands_m;
  split.num_bands_n = cfg.num_bands_n;
  split.num_bins = cfg.stft.fft_size / 2 + 1;
  const std::vector<int> edges =
      split.band_edges(distaug::cyclegan::Side::noisy);
  std::vector<double> sum(edges.size() - 1, 0.0);
  std::vector<size_t> count(edges.size() - 1, 0);
  for (const Waveform& w : wavs) {
    const distaug::Matrix feat =
        distaug::log_magnitude(distaug::stft(w, cfg.stft));
    for (int t = 0; t < feat.rows; ++t)
      for (size_t b = 0; b + 1 < edges.size(); ++b)
        for (int f = edges[b]; f < edges[b + 1]; ++f) {
          sum[b] += feat.at(t, f);
          ++count[b];
        }
  }
  for (size_t b = 0; b < sum.size(); ++b)
    if (count[b] > 0) sum[b] /= static_cast<double>(count[b]);
  return sum;
}

double l2_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size() && i < b.size(); ++i)
    acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

}  // namespace testutil
