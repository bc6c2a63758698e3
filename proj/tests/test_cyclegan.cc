// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"

#include "distaug/cyclegan.hpp"
#include "distaug/manifest.hpp"
#include "distaug/wav.hpp"
#include "support/testutil.hpp"

using namespace distaug;
using namespace distaug::cyclegan;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

Matrix random_patch(int rows, int cols, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 0.3);
  Matrix m(rows, cols);
  for (double& v : m.v) v = dist(rng);
  return m;
}

std::vector<Matrix> random_pool(const GanConfig& cfg, int count,
                                uint64_t seed) {
  std::vector<Matrix> pool;
  for (int i = 0; i < count; ++i)
    pool.push_back(
        random_patch(cfg.patch_frames, cfg.stft.num_bins(), seed + i));
  return pool;
}

void zero_params(const std::vector<nn::Tensor*>& ps) {
  for (nn::Tensor* p : ps) std::fill(p->data.begin(), p->data.end(), 0.0);
}

// Single-band bank whose output is sigmoid(w*x + b) per element.
std::vector<nn::Network> affine_sigmoid_bank(double w, double b) {
  std::mt19937_64 rng(1);
  std::vector<nn::Network> bank;
  bank.emplace_back(
      std::vector<nn::LayerSpec>{
          nn::LayerSpec::conv(1, 1, 1),
          nn::LayerSpec::activation(nn::LayerKind::sigmoid)},
      &rng);
  bank[0].params()[0]->data = {w};
  bank[0].params()[1]->data = {b};
  return bank;
}

nn::Tensor scalar_tensor(double v) {
  nn::Tensor t({1, 1, 1, 1});
  t.data = {v};
  return t;
}

double snr_db(const std::vector<double>& ref, const std::vector<double>& got) {
  double sig = 0.0, err = 0.0;
  const size_t n = std::min(ref.size(), got.size());
  for (size_t i = 0; i < n; ++i) {
    sig += ref[i] * ref[i];
    const double d = ref[i] - got[i];
    err += d * d;
  }
  if (err == 0.0) return 300.0;
  return 10.0 * std::log10(sig / err);
}

}  // namespace

TEST_CASE("subband split: 257 bins over 3 bands is 86/86/85") {
  SubbandSplit split;
  split.num_bins = 257;
  const std::vector<int> edges = split.band_edges(Side::noisy);
  CHECK(edges == std::vector<int>{0, 86, 172, 257});
}

TEST_CASE("subband split: contiguous cover, near-equal, wider first") {
  for (int bins : {5, 33, 64, 129, 257, 513}) {
    for (int bands = 1; bands <= 5; ++bands) {
      SubbandSplit split;
      split.num_bands_m = bands;
      split.num_bands_n = bands;
      split.num_bins = bins;
      const std::vector<int> edges = split.band_edges(Side::clean);
      REQUIRE(edges.size() == static_cast<size_t>(bands) + 1);
      CHECK(edges.front() == 0);
      CHECK(edges.back() == bins);
      int prev = bins;
      for (int i = 0; i < bands; ++i) {
        const int w = edges[i + 1] - edges[i];
        CHECK(w >= bins / bands);
        CHECK(w <= bins / bands + 1);
        CHECK(w <= prev);  // widths never increase left to right
        prev = w;
      }
    }
  }
}

TEST_CASE("subband split: invalid geometry rejected") {
  SubbandSplit split;
  split.num_bins = 2;
  split.num_bands_m = 3;
  CHECK_THROWS_AS(split.validate(), GanError);
  split.num_bands_m = 0;
  CHECK_THROWS_AS(split.validate(), GanError);
}

TEST_CASE("split_bands then concat_bands is the identity") {
  SubbandSplit split;
  split.num_bins = 33;
  const Matrix patch = random_patch(16, 33, 5);
  const std::vector<Matrix> bands = split_bands(patch, split, Side::clean);
  REQUIRE(bands.size() == 3);
  CHECK(bands[0].cols == 11);
  const Matrix back = concat_bands(bands);
  REQUIRE(back.same_shape(patch));
  for (size_t i = 0; i < patch.v.size(); ++i) CHECK(back.v[i] == patch.v[i]);
}

TEST_CASE("split_bands: wrong width is a coverage error") {
  SubbandSplit split;
  split.num_bins = 33;
  CHECK_THROWS_AS(split_bands(Matrix(16, 32), split, Side::clean),
                  CoverageMismatch);
}

TEST_CASE("split_bands_tensor agrees with the per-item matrix split") {
  SubbandSplit split;
  split.num_bins = 33;
  std::vector<Matrix> patches = {random_patch(16, 33, 7),
                                 random_patch(16, 33, 8)};
  const nn::Tensor batch = patches_to_tensor(patches);
  REQUIRE(batch.shape == std::vector<int>{2, 1, 16, 33});
  const std::vector<nn::Tensor> bands =
      split_bands_tensor(batch, split, Side::noisy);
  REQUIRE(bands.size() == 3);
  for (int item = 0; item < 2; ++item) {
    const std::vector<Matrix> want =
        split_bands(patches[static_cast<size_t>(item)], split, Side::noisy);
    for (size_t b = 0; b < bands.size(); ++b) {
      const Matrix got = tensor_to_patch(bands[b], item);
      REQUIRE(got.same_shape(want[b]));
      for (size_t i = 0; i < got.v.size(); ++i)
        CHECK(got.v[i] == want[b].v[i]);
    }
  }
}

TEST_CASE("patches_to_tensor round trips through tensor_to_patch") {
  std::vector<Matrix> patches = {random_patch(4, 9, 11),
                                 random_patch(4, 9, 12)};
  const nn::Tensor t = patches_to_tensor(patches);
  for (int i = 0; i < 2; ++i) {
    const Matrix back = tensor_to_patch(t, i);
    for (size_t k = 0; k < back.v.size(); ++k)
      CHECK(back.v[k] == patches[static_cast<size_t>(i)].v[k]);
  }
}

TEST_CASE("adv_loss: all-zero discriminators output one half everywhere") {
  GanConfig cfg = testutil::toy_gan_config();
  GanModel model = build_gan_model(cfg, 3);
  zero_params(model.discriminator_params());

  const nn::Tensor batch =
      patches_to_tensor(random_pool(cfg, 2, 21));
  const auto bands = split_bands_tensor(batch, model.split, Side::noisy);
  const double got =
      adv_loss(bands, bands, model.D_X, GanLossVariant::log_loss);
  const double want = 2.0 * cfg.num_bands_n * std::log(0.5);
  CHECK(got == doctest::Approx(want).epsilon(1e-9));

  // Least-squares objective: (0.5-1)^2 + 0.5^2 = 0.5 per band.
  const double ls =
      adv_loss(bands, bands, model.D_X, GanLossVariant::least_squares);
  CHECK(ls == doctest::Approx(0.5 * cfg.num_bands_n).epsilon(1e-9));
}

TEST_CASE("adv_loss: hand-set discriminator probabilities") {
  // D(real=1) = 0.8, D(fake=0) = 0.3.
  const std::vector<nn::Network> bank =
      affine_sigmoid_bank(logit(0.8) - logit(0.3), logit(0.3));
  const std::vector<nn::Tensor> real = {scalar_tensor(1.0)};
  const std::vector<nn::Tensor> fake = {scalar_tensor(0.0)};
  const double got = adv_loss(fake, real, bank, GanLossVariant::log_loss);
  CHECK(got ==
        doctest::Approx(std::log(0.8) + std::log(0.7)).epsilon(1e-9));

  const double ls = adv_loss(fake, real, bank, GanLossVariant::least_squares);
  CHECK(ls == doctest::Approx(0.04 + 0.09).epsilon(1e-9));
}

TEST_CASE("adv_loss: saturated discriminator hits the probability clamp") {
  // Huge bias drives sigmoid to 1 for both inputs; the fake term is then
  // log(1 - clamp(1)) = log(1e-7) instead of -inf.
  const std::vector<nn::Network> bank = affine_sigmoid_bank(0.0, 100.0);
  const std::vector<nn::Tensor> real = {scalar_tensor(1.0)};
  const std::vector<nn::Tensor> fake = {scalar_tensor(0.0)};
  const double got = adv_loss(fake, real, bank, GanLossVariant::log_loss);
  CHECK(std::isfinite(got));
  CHECK(got == doctest::Approx(std::log(1.0 - 1e-7) + std::log(1e-7))
                   .epsilon(1e-6));
}

TEST_CASE("adv_loss: band count mismatch rejected") {
  const std::vector<nn::Network> bank = affine_sigmoid_bank(1.0, 0.0);
  const std::vector<nn::Tensor> two = {scalar_tensor(1.0), scalar_tensor(0.0)};
  const std::vector<nn::Tensor> one = {scalar_tensor(1.0)};
  CHECK_THROWS_AS(adv_loss(two, two, bank), BandCountMismatch);
  CHECK_THROWS_AS(adv_loss(one, two, bank), BandCountMismatch);
}

TEST_CASE("cycle_loss: identity generators give exactly zero") {
  nn::Network G, F;  // empty = identity
  const nn::Tensor clean = patches_to_tensor({random_patch(4, 6, 31)});
  const nn::Tensor noisy = patches_to_tensor({random_patch(4, 6, 32)});
  CHECK(cycle_loss(G, F, clean, noisy) == 0.0);
}

TEST_CASE("cycle_loss: exact inverse pair gives zero, offset gives its size") {
  std::mt19937_64 rng(33);
  nn::Network G({nn::LayerSpec::conv(1, 1, 1)}, &rng);
  nn::Network F({nn::LayerSpec::conv(1, 1, 1)}, &rng);
  G.params()[0]->data = {2.0};
  G.params()[1]->data = {0.0};
  F.params()[0]->data = {0.5};
  F.params()[1]->data = {0.0};
  const nn::Tensor clean = patches_to_tensor({random_patch(3, 5, 34)});
  const nn::Tensor noisy = patches_to_tensor({random_patch(3, 5, 35)});
  CHECK(cycle_loss(G, F, clean, noisy) == 0.0);  // 0.5 * 2 * x == x exactly

  // Identity G, F adds 0.25: both cycle terms are off by exactly 0.25.
  nn::Network Gi;
  nn::Network Fb({nn::LayerSpec::conv(1, 1, 1)}, &rng);
  Fb.params()[0]->data = {1.0};
  Fb.params()[1]->data = {0.25};
  CHECK(cycle_loss(Gi, Fb, clean, noisy) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("total_loss: breakdown terms add up, lambda scales the cycle term") {
  GanConfig cfg = testutil::toy_gan_config();
  GanModel model = build_gan_model(cfg, 41);
  TrainBatch batch;
  batch.clean = patches_to_tensor(random_pool(cfg, 2, 42));
  batch.noisy = patches_to_tensor(random_pool(cfg, 2, 43));

  const LossBreakdown full = total_loss(model, batch);
  CHECK(full.total == doctest::Approx(full.adv_g + full.adv_f +
                                      cfg.lambda_cyc * full.cyc)
                          .epsilon(1e-12));

  GanModel flat = build_gan_model(cfg, 41);
  flat.config.lambda_cyc = 0.0;
  const LossBreakdown no_cyc = total_loss(flat, batch);
  CHECK(no_cyc.adv_g == doctest::Approx(full.adv_g).epsilon(1e-12));
  CHECK(no_cyc.cyc == doctest::Approx(full.cyc).epsilon(1e-12));
  CHECK(no_cyc.total ==
        doctest::Approx(no_cyc.adv_g + no_cyc.adv_f).epsilon(1e-12));
}

TEST_CASE("total_loss: identity generators and flat discriminators") {
  GanConfig cfg = testutil::toy_gan_config();
  cfg.loss = GanLossVariant::log_loss;
  GanModel model = build_gan_model(cfg, 44);
  model.G = nn::Network();
  model.F = nn::Network();
  zero_params(model.discriminator_params());

  TrainBatch batch;
  batch.clean = patches_to_tensor(random_pool(cfg, 2, 45));
  batch.noisy = patches_to_tensor(random_pool(cfg, 2, 46));
  const LossBreakdown out = total_loss(model, batch);
  CHECK(out.cyc == 0.0);
  const double want =
      2.0 * (cfg.num_bands_m + cfg.num_bands_n) * std::log(0.5);
  CHECK(out.adv_g + out.adv_f == doctest::Approx(want).epsilon(1e-9));
  CHECK(out.total == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("train: zero steps leaves parameters untouched, empty history") {
  GanConfig cfg = testutil::toy_gan_config();
  GanModel model = build_gan_model(cfg, 51);
  std::vector<std::vector<double>> before;
  for (nn::Tensor* p : model.generator_params()) before.push_back(p->data);
  for (nn::Tensor* p : model.discriminator_params()) before.push_back(p->data);

  TrainSchedule sched;
  sched.steps = 0;
  sched.seed = 7;
  const TrainResult res = train_cyclegan(&model, random_pool(cfg, 3, 52),
                                         random_pool(cfg, 3, 53), sched);
  CHECK(res.history.empty());
  size_t idx = 0;
  for (nn::Tensor* p : model.generator_params())
    CHECK(p->data == before[idx++]);
  for (nn::Tensor* p : model.discriminator_params())
    CHECK(p->data == before[idx++]);
}

TEST_CASE("train: empty corpora rejected") {
  GanConfig cfg = testutil::toy_gan_config();
  GanModel model = build_gan_model(cfg, 61);
  TrainSchedule sched;
  sched.steps = 1;
  const std::vector<Matrix> pool = random_pool(cfg, 2, 62);
  CHECK_THROWS_AS(train_cyclegan(&model, {}, pool, sched), EmptyCorpus);
  CHECK_THROWS_AS(train_cyclegan(&model, pool, {}, sched), EmptyCorpus);
}

TEST_CASE("train: patch geometry must match the model") {
  GanConfig cfg = testutil::toy_gan_config();
  GanModel model = build_gan_model(cfg, 63);
  TrainSchedule sched;
  sched.steps = 1;
  const std::vector<Matrix> good = random_pool(cfg, 2, 64);
  const std::vector<Matrix> bad = {random_patch(cfg.patch_frames, 7, 65)};
  CHECK_THROWS_AS(train_cyclegan(&model, bad, good, sched), nn::ShapeMismatch);
}

TEST_CASE("train: three steps update generators and discriminators") {
  GanConfig cfg = testutil::toy_gan_config();
  GanModel model = build_gan_model(cfg, 71);
  const std::vector<double> g0 = model.generator_params()[0]->data;
  const std::vector<double> d0 = model.discriminator_params()[0]->data;

  TrainSchedule sched;
  sched.steps = 3;
  sched.seed = 72;
  const TrainResult res = train_cyclegan(&model, random_pool(cfg, 4, 73),
                                         random_pool(cfg, 4, 74), sched);
  REQUIRE(res.history.size() == 3);
  CHECK(model.generator_params()[0]->data != g0);
  CHECK(model.discriminator_params()[0]->data != d0);
  for (size_t i = 0; i < res.history.size(); ++i) {
    const LossRow& r = res.history[i];
    CHECK(r.step == static_cast<int>(i) + 1);
    CHECK(std::isfinite(r.total));
    CHECK(r.cyc >= 0.0);
    // The logged total is assembled from the logged parts.
    CHECK(r.total == doctest::Approx(r.adv_g + r.adv_f +
                                     cfg.lambda_cyc * r.cyc)
                         .epsilon(1e-9));
  }
}

TEST_CASE("train: identical seeds give identical histories") {
  GanConfig cfg = testutil::toy_gan_config();
  const std::vector<Matrix> clean = random_pool(cfg, 4, 81);
  const std::vector<Matrix> noisy = random_pool(cfg, 4, 82);

  auto run = [&](uint64_t model_seed, uint64_t train_seed) {
    GanModel model = build_gan_model(cfg, model_seed);
    TrainSchedule sched;
    sched.steps = 4;
    sched.seed = train_seed;
    return train_cyclegan(&model, clean, noisy, sched);
  };

  const TrainResult a = run(5, 6);
  const TrainResult b = run(5, 6);
  REQUIRE(a.history.size() == b.history.size());
  for (size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].adv_g == b.history[i].adv_g);
    CHECK(a.history[i].adv_f == b.history[i].adv_f);
    CHECK(a.history[i].cyc == b.history[i].cyc);
    CHECK(a.history[i].total == b.history[i].total);
  }

  const TrainResult c = run(5, 99);
  bool any_diff = false;
  for (size_t i = 0; i < c.history.size(); ++i)
    any_diff = any_diff || c.history[i].total != a.history[i].total;
  CHECK(any_diff);
}

TEST_CASE("history csv: header plus one full-precision row per step") {
  const std::string dir = testutil::temp_dir("hist");
  const std::string path = dir + "/h.csv";
  std::vector<LossRow> rows(2);
  rows[0] = {1, 0.5, -0.25, 1.0 / 3.0, 2.0};
  rows[1] = {2, 0.125, 0.0, 0.1, 1.5};
  write_history_csv(rows, path);

  std::ifstream is(path);
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "step,adv_G,adv_F,cyc,total");
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    int step = 0;
    double a = 0, b = 0, c = 0, t = 0;
    REQUIRE(std::sscanf(line.c_str(), "%d,%lg,%lg,%lg,%lg", &step, &a, &b, &c,
                        &t) == 5);
    CHECK(step == n);
    // %.17g round trips doubles exactly.
    CHECK(a == rows[static_cast<size_t>(n - 1)].adv_g);
    CHECK(c == rows[static_cast<size_t>(n - 1)].cyc);
  }
  CHECK(n == 2);
}

TEST_CASE("config: json round trip preserves every field") {
  GanConfig cfg = testutil::toy_gan_config();
  cfg.lambda_cyc = 7.5;
  cfg.loss = GanLossVariant::log_loss;
  cfg.adam.learning_rate = 3e-4;
  const GanConfig back = GanConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(back.lambda_cyc == 7.5);
  CHECK(back.loss == GanLossVariant::log_loss);
  CHECK(back.adam.learning_rate == 3e-4);
  CHECK(back.stft.win_length == cfg.stft.win_length);
}

TEST_CASE("config: bad values rejected with context") {
  GanConfig cfg = testutil::toy_gan_config();
  cfg.patch_frames = 1;
  CHECK_THROWS_AS(cfg.validate(), GanError);
  nlohmann::json j = testutil::toy_gan_config().to_json();
  j["loss"] = "hinge";
  CHECK_THROWS_AS(GanConfig::from_json(j), GanError);
}

TEST_CASE("checkpoint: save, load, re-save is byte identical") {
  GanConfig cfg = testutil::toy_gan_config();
  GanModel model = build_gan_model(cfg, 91);
  // Give the optimizer some nontrivial state.
  nn::Adam opt(model.generator_params(), model.generator_grads(), cfg.adam);
  for (nn::Tensor* g : model.generator_grads())
    std::fill(g->data.begin(), g->data.end(), 0.01);
  opt.step();
  opt.step();
  nn::Adam dopt(model.discriminator_params(), model.discriminator_grads(),
                cfg.adam);
  dopt.step();

  const std::string dir = testutil::temp_dir("ckpt");
  const std::string p1 = dir + "/a.ckpt";
  const std::string p2 = dir + "/b.ckpt";
  save_checkpoint_parts(&model, blob_from_adam(opt), blob_from_adam(dopt), p1);

  Checkpoint loaded = load_checkpoint(p1);
  CHECK(loaded.model.config.to_json() == model.config.to_json());
  CHECK(loaded.gen_opt.step_count == 2);
  CHECK(loaded.disc_opt.step_count == 1);
  REQUIRE(loaded.gen_opt.m.size() == opt.first_moments().size());
  for (size_t i = 0; i < loaded.gen_opt.m.size(); ++i) {
    CHECK(loaded.gen_opt.m[i] == opt.first_moments()[i].data);
    CHECK(loaded.gen_opt.v[i] == opt.second_moments()[i].data);
  }

  save_checkpoint(&loaded, p2);
  CHECK(testutil::read_bytes(p1) == testutil::read_bytes(p2));

  // Loaded generator computes the same function.
  const nn::Tensor x = patches_to_tensor(random_pool(cfg, 1, 92));
  const nn::Tensor ya = model.G.forward(x);
  const nn::Tensor yb = loaded.model.G.forward(x);
  REQUIRE(ya.same_shape(yb));
  for (size_t i = 0; i < ya.data.size(); ++i) CHECK(ya.data[i] == yb.data[i]);
}

TEST_CASE("checkpoint: corrupt or missing files rejected") {
  const std::string dir = testutil::temp_dir("ckpt-bad");
  CHECK_THROWS_AS(load_checkpoint(dir + "/nope.ckpt"), CheckpointError);

  const std::string bad = dir + "/bad.ckpt";
  testutil::write_text(bad, "NOTAGAN1 and then some bytes");
  CHECK_THROWS_AS(load_checkpoint(bad), CheckpointError);

  GanConfig cfg = testutil::toy_gan_config();
  GanModel model = build_gan_model(cfg, 93);
  const std::string good = dir + "/good.ckpt";
  save_checkpoint_parts(&model, OptimizerBlob{}, OptimizerBlob{}, good);
  const std::string bytes = testutil::read_bytes(good);
  const std::string trunc = dir + "/trunc.ckpt";
  {
    std::ofstream os(trunc, std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(load_checkpoint(trunc), CheckpointError);
}

TEST_CASE("load_patch_corpus: patch geometry, count, and stats") {
  GanConfig cfg = testutil::toy_gan_config();
  const std::string dir = testutil::temp_dir("corpus");
  std::filesystem::create_directories(dir + "/wavs");
  for (int i = 0; i < 3; ++i)
    write_wav(dir + "/wavs/u" + std::to_string(i) + ".wav",
              testutil::toy_clean_wave(100 + static_cast<uint64_t>(i), 16000));
  NormStats stats;
  const std::vector<Matrix> pool =
      load_patch_corpus(dir + "/wavs", cfg, &stats);
  CHECK(!pool.empty());
  for (const Matrix& p : pool) {
    CHECK(p.rows == cfg.patch_frames);
    CHECK(p.cols == cfg.stft.num_bins());
  }
  REQUIRE(static_cast<int>(stats.mean.size()) == cfg.stft.num_bins());
  // 1 s at stft 64/32 is 499 frames: floor((499-16)/8)+1 = 61 patches per file.
  CHECK(pool.size() == 3 * 61);

  CHECK_THROWS_AS(load_patch_corpus(dir + "/missing", cfg, &stats), GanError);
}

TEST_CASE("map_clean_to_noisy: identity generator reconstructs the input") {
  GanConfig cfg = testutil::toy_gan_config();
  GanModel model = build_gan_model(cfg, 95);
  model.G = nn::Network();  // identity map in feature space

  const Waveform w = testutil::toy_clean_wave(7, 24000);
  const Waveform out = map_clean_to_noisy(model, w);
  CHECK(out.samples.size() == w.samples.size());
  CHECK(out.sample_rate_hz == 16000);
  CHECK(snr_db(w.samples, out.samples) >= 40.0);
}

TEST_CASE("map_clean_to_noisy: zero input stays zero-length-consistent") {
  GanConfig cfg = testutil::toy_gan_config();
  GanModel model = build_gan_model(cfg, 96);
  Waveform w;
  w.sample_rate_hz = 16000;
  w.samples.assign(4000, 0.0);
  const Waveform out = map_clean_to_noisy(model, w);
  CHECK(out.samples.size() == w.samples.size());
  for (double v : out.samples) CHECK(std::isfinite(v));
}

TEST_CASE("map_clean_to_noisy: too-short input rejected") {
  GanConfig cfg = testutil::toy_gan_config();
  GanModel model = build_gan_model(cfg, 97);
  Waveform w;
  w.sample_rate_hz = 16000;
  // 100 samples is 3 frames at 64/32, below the 16-frame patch.
  w.samples.assign(100, 0.1);
  CHECK_THROWS_AS(map_clean_to_noisy(model, w), TooShort);
}

TEST_CASE("augment_manifest_cgan: maps records, collects failures") {
  GanConfig cfg = testutil::toy_gan_config();
  GanModel model = build_gan_model(cfg, 98);
  model.G = nn::Network();

  const std::string dir = testutil::temp_dir("cgan-aug");
  std::filesystem::create_directories(dir + "/in");
  std::vector<ManifestRecord> recs;
  for (int i = 0; i < 3; ++i) {
    const std::string p = dir + "/in/u" + std::to_string(i) + ".wav";
    write_wav(p, testutil::toy_clean_wave(200 + static_cast<uint64_t>(i),
                                          16000));
    recs.push_back(testutil::record("utt" + std::to_string(i), p, 1.0,
                                    "SOME WORDS HERE", Source::orig));
  }
  {
    Waveform tiny;
    tiny.sample_rate_hz = 16000;
    tiny.samples.assign(100, 0.05);
    const std::string p = dir + "/in/tiny.wav";
    write_wav(p, tiny);
    recs.push_back(testutil::record("uttshort", p, 100.0 / 16000.0, "TINY",
                                    Source::orig));
  }
  const Manifest in = Manifest::from_records(recs);

  const AugmentResult res =
      augment_manifest_cgan(model, in, dir + "/out", 1);
  CHECK(res.manifest.count(Source::cgan) == 3);
  CHECK(res.manifest.records().size() == 3);
  REQUIRE(res.failures.size() == 1);
  CHECK(res.failures[0].utt_id == "uttshort");
  for (const ManifestRecord& r : res.manifest.records()) {
    CHECK(r.source == Source::cgan);
    CHECK(std::filesystem::exists(r.audio_path));
    const Waveform w = read_wav(r.audio_path);
    CHECK(w.samples.size() == 16000);
    CHECK(r.duration_s == doctest::Approx(1.0).epsilon(1e-9));
  }

  const AugmentResult empty =
      augment_manifest_cgan(model, Manifest(), dir + "/out2", 1);
  CHECK(empty.manifest.records().size() == 0);
  CHECK(empty.failures.empty());
}
