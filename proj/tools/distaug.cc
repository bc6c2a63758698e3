// Copyright 2026 The distaug Authors
// License: Apache 2.0
//
// Command-line entry point. Every stage of the augmentation pipeline is
// available both as a standalone subcommand and as a stage in a config-driven
// `run`. The standalone subcommands translate flags into the same parameter
// objects the pipeline validates, so the two paths cannot drift apart.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "distaug/manifest.hpp"
#include "distaug/pipeline.hpp"
#include "distaug/pseudolabel.hpp"

namespace {

using json = nlohmann::json;
using distaug::pipeline::ConfigInvalid;
using distaug::pipeline::StageKind;

constexpr const char* kVersion = "distaug 0.1.0";

void print_report(const json& fragment) {
  std::cout << fragment.dump(2) << std::endl;
}

void run_stage(StageKind kind, const json& params, uint64_t seed, int jobs) {
  print_report(distaug::pipeline::run_single_stage(kind, params, seed, jobs));
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::vector<double> parse_factor_list(const std::string& s) {
  std::vector<double> out;
  for (const std::string& item : split_csv(s)) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigInvalid("factors", "not a number: \"" + item + "\"");
    }
  }
  if (out.empty()) throw ConfigInvalid("factors", "empty list");
  return out;
}

json load_json_file(const std::string& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid(field, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigInvalid(field, e.what());
  }
  return j;
}

struct CommonArgs {
  uint64_t seed = 0;
  int jobs = 1;
};

void add_seed(CLI::App* sub, CommonArgs* a) {
  sub->add_option("--seed", a->seed, "Random seed for this stage");
}

void add_jobs(CLI::App* sub, CommonArgs* a) {
  sub->add_option("--jobs", a->jobs, "Worker thread limit")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Corpus augmentation toolkit for distant-talk ASR training data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // assemble: merge the four provenance manifests into one training set.
  struct {
    std::string orig, tts, cgan, pl, out;
  } as;
  CLI::App* assemble =
      app.add_subcommand("assemble", "Combine stage manifests into one");
  assemble->add_option("--orig", as.orig, "Original-corpus manifest")
      ->required();
  assemble->add_option("--tts", as.tts, "TTS-augmented manifest")->required();
  assemble->add_option("--cgan", as.cgan, "Cycle-GAN-mapped manifest")
      ->required();
  assemble->add_option("--pl", as.pl, "Pseudo-labeled manifest")->required();
  assemble->add_option("--out", as.out, "Combined manifest path")->required();
  assemble->callback([&] {
    run_stage(StageKind::assemble,
              json{{"orig", as.orig},
                   {"tts", as.tts},
                   {"cgan", as.cgan},
                   {"pl", as.pl},
                   {"out", as.out}},
              0, 1);
  });

  // rir: batch-generate simulated room impulse responses.
  struct {
    CommonArgs c;
    int count = 0;
    std::string ranges, out;
  } ri;
  CLI::App* rir = app.add_subcommand("rir", "Generate room impulse responses");
  rir->add_option("--count", ri.count, "Number of RIRs")
      ->required()
      ->check(CLI::PositiveNumber);
  add_seed(rir, &ri.c);
  rir->add_option("--ranges", ri.ranges,
                  "JSON file with room geometry sampling ranges");
  rir->add_option("--out", ri.out, "Output directory")->required();
  add_jobs(rir, &ri.c);
  rir->callback([&] {
    json params{{"count", ri.count}, {"out_dir", ri.out}};
    if (!ri.ranges.empty()) params["ranges_file"] = ri.ranges;
    run_stage(StageKind::rir, params, ri.c.seed, ri.c.jobs);
  });

  // tts-aug: synthesize speech for manifest texts, then reverberate and mix.
  struct {
    CommonArgs c;
    std::string in, cond, engine = "stub", rirs, noise, snr = "10:20";
    std::string out_dir, out;
    int xvector_dim = 512, gst_dim = 256;
    bool no_perturb = false;
  } ta;
  CLI::App* tts =
      app.add_subcommand("tts-aug", "Synthesize and perturb TTS audio");
  tts->add_option("--in", ta.in, "Input manifest")->required();
  tts->add_option("--cond", ta.cond, "Speaker/style conditioning table")
      ->required();
  tts->add_option("--xvector-dim", ta.xvector_dim,
                  "Expected x-vector length in the conditioning table")
      ->check(CLI::PositiveNumber);
  tts->add_option("--gst-dim", ta.gst_dim,
                  "Expected style-token vector length")
      ->check(CLI::PositiveNumber);
  tts->add_option("--engine", ta.engine, "TTS engine: stub or endpoint URI");
  tts->add_option("--rirs", ta.rirs, "Directory of RIR WAVs");
  tts->add_option("--noise", ta.noise, "Directory of noise WAVs");
  tts->add_option("--snr", ta.snr, "Mixing SNR range LO:HI in dB");
  add_seed(tts, &ta.c);
  tts->add_option("--out-dir", ta.out_dir, "Directory for synthesized WAVs")
      ->required();
  tts->add_option("--out", ta.out, "Output manifest")->required();
  tts->add_flag("--no-perturb", ta.no_perturb,
                "Skip reverberation and noise mixing");
  add_jobs(tts, &ta.c);
  tts->callback([&] {
    json params{{"in", ta.in},        {"cond", ta.cond},
                {"engine", ta.engine}, {"snr", ta.snr},
                {"out_dir", ta.out_dir}, {"out", ta.out},
                {"perturb", !ta.no_perturb},
                {"cond_dims",
                 {{"xvector", ta.xvector_dim}, {"gst", ta.gst_dim}}}};
    if (!ta.rirs.empty()) params["rirs"] = ta.rirs;
    if (!ta.noise.empty()) params["noise"] = ta.noise;
    run_stage(StageKind::tts_aug, params, ta.c.seed, ta.c.jobs);
  });

  // cgan-train: fit the clean-to-noisy spectrogram translator.
  struct {
    CommonArgs c;
    std::string clean, noisy, config, out;
  } ct;
  CLI::App* cgan_train =
      app.add_subcommand("cgan-train", "Train the Cycle-GAN mapper");
  cgan_train->add_option("--clean", ct.clean, "Directory of clean-domain WAVs")
      ->required();
  cgan_train->add_option("--noisy", ct.noisy, "Directory of noisy-domain WAVs")
      ->required();
  cgan_train->add_option("--config", ct.config, "Model/training config JSON")
      ->required();
  add_seed(cgan_train, &ct.c);
  cgan_train->add_option("--out", ct.out, "Checkpoint output path")->required();
  cgan_train->callback([&] {
    run_stage(StageKind::cgan_train,
              json{{"clean_dir", ct.clean},
                   {"noisy_dir", ct.noisy},
                   {"config", ct.config},
                   {"out", ct.out}},
              ct.c.seed, 1);
  });

  // cgan-apply: map clean recordings through a trained model.
  struct {
    CommonArgs c;
    std::string model, in, out_dir, out;
  } ca;
  CLI::App* cgan_apply =
      app.add_subcommand("cgan-apply", "Apply a trained Cycle-GAN mapper");
  cgan_apply->add_option("--model", ca.model, "Checkpoint path")->required();
  cgan_apply->add_option("--in", ca.in, "Input manifest")->required();
  cgan_apply->add_option("--out-dir", ca.out_dir, "Directory for mapped WAVs")
      ->required();
  cgan_apply->add_option("--out", ca.out, "Output manifest")->required();
  add_jobs(cgan_apply, &ca.c);
  cgan_apply->callback([&] {
    run_stage(StageKind::cgan_apply,
              json{{"model", ca.model},
                   {"in", ca.in},
                   {"out_dir", ca.out_dir},
                   {"out", ca.out}},
              0, ca.c.jobs);
  });

  // pl-filter: keep pseudo-labeled records whose CER clears the threshold.
  struct {
    std::string refs, hyps, delta = "50", out;
    bool exclude_exact = false;
  } pf;
  CLI::App* pl_filter =
      app.add_subcommand("pl-filter", "Filter pseudo-labels by CER threshold");
  pl_filter->add_option("--refs", pf.refs, "Reference manifest")->required();
  pl_filter->add_option("--hyps", pf.hyps, "Hypothesis table")->required();
  pl_filter->add_option("--delta", pf.delta,
                        "Keep threshold in percent CER, or inf");
  pl_filter->add_flag("--exclude-exact", pf.exclude_exact,
                      "Drop records whose hypothesis matches exactly");
  pl_filter->add_option("--out", pf.out, "Output manifest")->required();
  pl_filter->callback([&] {
    run_stage(StageKind::pl_filter,
              json{{"refs", pf.refs},
                   {"hyps", pf.hyps},
                   {"delta", pf.delta},
                   {"exclude_exact", pf.exclude_exact},
                   {"out", pf.out}},
              0, 1);
  });

  // pl-sweep: report kept counts/hours across a list of thresholds.
  struct {
    std::string refs, hyps, deltas = "20,50,70,inf", out;
  } ps;
  CLI::App* pl_sweep =
      app.add_subcommand("pl-sweep", "Sweep CER thresholds and report yield");
  pl_sweep->add_option("--refs", ps.refs, "Reference manifest")->required();
  pl_sweep->add_option("--hyps", ps.hyps, "Hypothesis table")->required();
  pl_sweep->add_option("--deltas", ps.deltas,
                       "Comma-separated thresholds, inf allowed");
  pl_sweep->add_option("--out", ps.out, "Optional JSON output path");
  pl_sweep->callback([&] {
    std::vector<double> deltas;
    for (const std::string& item : split_csv(ps.deltas)) {
      try {
        deltas.push_back(distaug::parse_delta(item));
      } catch (const std::exception& e) {
        throw ConfigInvalid("deltas", e.what());
      }
    }
    if (deltas.empty()) throw ConfigInvalid("deltas", "empty list");
    const distaug::Manifest refs = distaug::read_manifest(ps.refs);
    const auto hyps = distaug::read_hypotheses(ps.hyps);
    const auto rows = distaug::threshold_sweep(refs, hyps, deltas);
    json out = json::array();
    std::printf("%-10s %10s %12s\n", "delta", "kept", "kept_hours");
    for (const auto& row : rows) {
      char dbuf[32];
      if (std::isinf(row.delta))
        std::snprintf(dbuf, sizeof dbuf, "inf");
      else
        std::snprintf(dbuf, sizeof dbuf, "%g", row.delta);
      std::printf("%-10s %10zu %12.4f\n", dbuf, row.kept, row.kept_hours);
      out.push_back({{"delta", row.delta},
                     {"kept", row.kept},
                     {"kept_hours", row.kept_hours}});
    }
    if (!ps.out.empty()) {
      std::ofstream os(ps.out, std::ios::trunc);
      if (!os) throw ConfigInvalid("out", "cannot open " + ps.out);
      os << out.dump(2) << '\n';
    }
  });

  // speed: resample each record by one or more tempo factors.
  struct {
    CommonArgs c;
    std::string in, factors = "0.9,1.0,1.1", out_dir, out;
  } sp;
  CLI::App* speed =
      app.add_subcommand("speed", "Speed-perturb a manifest's audio");
  speed->add_option("--in", sp.in, "Input manifest")->required();
  speed->add_option("--factors", sp.factors, "Comma-separated tempo factors");
  speed->add_option("--out-dir", sp.out_dir, "Directory for resampled WAVs")
      ->required();
  speed->add_option("--out", sp.out, "Output manifest")->required();
  add_jobs(speed, &sp.c);
  speed->callback([&] {
    run_stage(StageKind::speed,
              json{{"in", sp.in},
                   {"factors", parse_factor_list(sp.factors)},
                   {"out_dir", sp.out_dir},
                   {"out", sp.out}},
              0, sp.c.jobs);
  });

  // mix: reverberate (optional) and add noise at a sampled SNR.
  struct {
    CommonArgs c;
    std::string in, noise, rirs, snr = "10:20", out_dir, out;
  } mx;
  CLI::App* mix = app.add_subcommand("mix", "Add reverberation and noise");
  mix->add_option("--in", mx.in, "Input manifest")->required();
  mix->add_option("--noise", mx.noise, "Directory of noise WAVs")->required();
  mix->add_option("--rirs", mx.rirs, "Directory of RIR WAVs");
  mix->add_option("--snr", mx.snr, "Mixing SNR range LO:HI in dB");
  add_seed(mix, &mx.c);
  mix->add_option("--out-dir", mx.out_dir, "Directory for mixed WAVs")
      ->required();
  mix->add_option("--out", mx.out, "Output manifest")->required();
  add_jobs(mix, &mx.c);
  mix->callback([&] {
    json params{{"in", mx.in},
                {"noise", mx.noise},
                {"snr", mx.snr},
                {"out_dir", mx.out_dir},
                {"out", mx.out}};
    if (!mx.rirs.empty()) params["rirs"] = mx.rirs;
    run_stage(StageKind::mix, params, mx.c.seed, mx.c.jobs);
  });

  // specaug: extract log-magnitude features and apply masking.
  struct {
    CommonArgs c;
    std::string in, out_dir, policy;
  } sa;
  CLI::App* specaug =
      app.add_subcommand("specaug", "Mask features for on-the-fly inspection");
  specaug->add_option("--in", sa.in, "Input manifest")->required();
  specaug->add_option("--out-dir", sa.out_dir, "Directory for feature files")
      ->required();
  specaug->add_option("--specaug-seed", sa.c.seed, "Masking seed");
  specaug->add_option("--policy", sa.policy, "JSON file with mask policy");
  add_jobs(specaug, &sa.c);
  specaug->callback([&] {
    json params{{"in", sa.in}, {"out_dir", sa.out_dir}};
    if (!sa.policy.empty())
      params["policy"] = load_json_file(sa.policy, "policy");
    run_stage(StageKind::specaug, params, sa.c.seed, sa.c.jobs);
  });

  // run: execute a multi-stage pipeline config.
  struct {
    std::string config;
    int jobs = 0;
  } rn;
  CLI::App* run = app.add_subcommand("run", "Run a pipeline config");
  run->add_option("config", rn.config, "Pipeline config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--jobs", rn.jobs, "Override the config's worker limit")
      ->check(CLI::PositiveNumber);
  run->callback([&] {
    distaug::pipeline::PipelineConfig cfg =
        distaug::pipeline::PipelineConfig::from_file(rn.config);
    if (rn.jobs > 0) cfg.jobs = rn.jobs;
    print_report(distaug::pipeline::run(cfg));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigInvalid& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
