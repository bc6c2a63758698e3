// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_CYCLEGAN_HPP_
#define DISTAUG_CYCLEGAN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "distaug/dsp.hpp"
#include "distaug/manifest.hpp"
#include "distaug/matrix.hpp"
#include "distaug/nn/adam.hpp"
#include "distaug/nn/layers.hpp"

#include "json.hpp"

namespace distaug {
namespace cyclegan {

struct GanError : std::runtime_error {
  explicit GanError(const std::string& msg) : std::runtime_error(msg) {}
};
struct CoverageMismatch : GanError {
  CoverageMismatch(int have, int want)
      : GanError("band coverage mismatch: patch has " + std::to_string(have) +
                 " bins, split covers " + std::to_string(want)) {}
};
struct BandCountMismatch : GanError {
  BandCountMismatch(size_t bands, size_t discs)
      : GanError("band count " + std::to_string(bands) +
                 " does not match discriminator count " +
                 std::to_string(discs)) {}
};
struct EmptyCorpus : GanError {
  explicit EmptyCorpus(const std::string& which)
      : GanError("empty " + which + " training corpus") {}
};
struct DivergenceDetected : GanError {
  explicit DivergenceDetected(int step)
      : GanError("non-finite loss at step " + std::to_string(step)) {}
};
struct TooShort : GanError {
  TooShort(int frames, int patch)
      : GanError("utterance has " + std::to_string(frames) +
                 " frames, needs at least " + std::to_string(patch)) {}
};
struct CheckpointError : GanError {
  explicit CheckpointError(const std::string& msg)
      : GanError("checkpoint: " + msg) {}
};

enum class Side { clean, noisy };

// Contiguous balanced partition of [0, F) into m (clean side) or
// n (noisy side) frequency bands; sizes differ by at most one, wider
// bands first.
struct SubbandSplit {
  int num_bands_m = 3;
  int num_bands_n = 3;
  int num_bins = 0;

  void validate() const;
  int bands(Side side) const {
    return side == Side::clean ? num_bands_m : num_bands_n;
  }
  // bands+1 edges, edges[0] = 0, edges[bands] = num_bins.
  std::vector<int> band_edges(Side side) const;
};

std::vector<Matrix> split_bands(const Matrix& patch, const SubbandSplit& split,
                                Side side);
Matrix concat_bands(const std::vector<Matrix>& bands);

enum class GanLossVariant { log_loss, least_squares };

GanLossVariant loss_variant_from_string(const std::string& s);
const char* loss_variant_name(GanLossVariant v);

struct GanConfig {
  StftConfig stft;
  int sample_rate_hz = 16000;
  int patch_frames = 128;
  int num_bands_m = 3;
  int num_bands_n = 3;
  double lambda_cyc = 10.0;
  GanLossVariant loss = GanLossVariant::log_loss;
  // Normalized features are divided by this before the generators so the
  // tanh output head can cover the data range; inverted on the way out.
  double feature_scale = 3.0;
  int gen_base_width = 32;
  int gen_downsamples = 2;
  int gen_resblocks = 4;
  int disc_base_width = 32;
  int disc_layers = 4;
  int disc_kernel = 4;
  double leaky_slope = 0.2;
  nn::AdamConfig adam;
  int batch_size = 4;
  int steps = 2000;
  int checkpoint_every = 0;  // 0: only the final checkpoint

  void validate() const;
  nlohmann::json to_json() const;
  static GanConfig from_json(const nlohmann::json& j);
  static GanConfig from_file(const std::string& path);
};

// Two generators, one discriminator bank per domain, plus the feature
// statistics both directions were trained under.
struct GanModel {
  GanConfig config;
  SubbandSplit split;
  nn::Network G;  // clean -> noisy
  nn::Network F;  // noisy -> clean
  std::vector<nn::Network> D_S;  // clean-side bank, one per band
  std::vector<nn::Network> D_X;  // noisy-side bank
  NormStats clean_stats;
  NormStats noisy_stats;

  std::vector<nn::Tensor*> generator_params();
  std::vector<nn::Tensor*> generator_grads();
  std::vector<nn::Tensor*> discriminator_params();
  std::vector<nn::Tensor*> discriminator_grads();
};

// Fresh model with seeded parameter init; norm stats start as identity
// and are filled in by corpus loading.
GanModel build_gan_model(const GanConfig& cfg, uint64_t seed);

// Generator layer stack for a patch_frames x num_bins input, with
// transposed-conv output padding chosen to restore pre-downsample shapes.
std::vector<nn::LayerSpec> generator_specs(const GanConfig& cfg);
std::vector<nn::LayerSpec> discriminator_specs(const GanConfig& cfg,
                                               int band_bins);

struct TrainBatch {
  nn::Tensor clean;  // N x 1 x patch_frames x F
  nn::Tensor noisy;

  void validate() const;
};

nn::Tensor patches_to_tensor(const std::vector<Matrix>& patches);
Matrix tensor_to_patch(const nn::Tensor& t, int item);
std::vector<nn::Tensor> split_bands_tensor(const nn::Tensor& batch,
                                           const SubbandSplit& split,
                                           Side side);

// Adversarial value for one direction: sum over bands of
// E[log D(real)] + E[log(1 - D(fake))], discriminator outputs clamped to
// [1e-7, 1 - 1e-7]. The least-squares variant reports the discriminator
// objective sum E[(D(real)-1)^2] + E[D(fake)^2] instead.
double adv_loss(const std::vector<nn::Tensor>& fake_bands,
                const std::vector<nn::Tensor>& real_bands,
                const std::vector<nn::Network>& bank,
                GanLossVariant variant = GanLossVariant::log_loss);

// E||F(G(clean)) - clean||_1 + E||G(F(noisy)) - noisy||_1, mean over
// elements.
double cycle_loss(const nn::Network& G, const nn::Network& F,
                  const nn::Tensor& clean, const nn::Tensor& noisy);

struct LossBreakdown {
  double adv_g = 0.0;
  double adv_f = 0.0;
  double cyc = 0.0;
  double total = 0.0;
};

LossBreakdown total_loss(const GanModel& model, const TrainBatch& batch);

struct LossRow {
  int step = 0;
  double adv_g = 0.0;
  double adv_f = 0.0;
  double cyc = 0.0;
  double total = 0.0;
};

struct TrainSchedule {
  int steps = 2000;
  uint64_t seed = 0;
  int checkpoint_every = 0;
  std::string checkpoint_path;  // empty: no checkpoints written
  std::string history_csv_path;  // empty: history kept in memory only
};

struct TrainResult {
  std::vector<LossRow> history;
};

// Alternating update loop: each step trains the discriminator banks on
// the current generators, then the generators (and cycle term) through
// frozen discriminators. Deterministic given the schedule seed.
TrainResult train_cyclegan(GanModel* model,
                           const std::vector<Matrix>& clean_patches,
                           const std::vector<Matrix>& noisy_patches,
                           const TrainSchedule& sched);

void write_history_csv(const std::vector<LossRow>& history,
                       const std::string& path);

// Patch pool from a directory of WAV files: STFT, log magnitude,
// per-domain normalization, feature scaling, then patch_frames-long
// slices at 50% overlap. Files are visited in sorted name order.
// Computes and returns the domain statistics through `stats`.
std::vector<Matrix> load_patch_corpus(const std::string& wav_dir,
                                      const GanConfig& cfg, NormStats* stats);

struct OptimizerBlob {
  uint64_t step_count = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

struct Checkpoint {
  GanModel model;
  OptimizerBlob gen_opt;
  OptimizerBlob disc_opt;
};

// Versioned binary container; byte-identical output for identical state.
void save_checkpoint(Checkpoint* ck, const std::string& path);
void save_checkpoint_parts(GanModel* model, const OptimizerBlob& gen_opt,
                           const OptimizerBlob& disc_opt,
                           const std::string& path);
Checkpoint load_checkpoint(const std::string& path);
OptimizerBlob blob_from_adam(const nn::Adam& opt);

// stft -> log magnitude -> normalize(clean stats) -> G patchwise with
// triangular overlap averaging -> denormalize(noisy stats) -> source
// phase -> istft, trimmed to the input length.
Waveform map_clean_to_noisy(const GanModel& model, const Waveform& w);

struct AugmentResult {
  Manifest manifest;
  std::vector<RecordFailure> failures;
};

AugmentResult augment_manifest_cgan(const GanModel& model, const Manifest& in,
                                    const std::string& out_dir, int jobs = 1);

}  // namespace cyclegan
}  // namespace distaug

#endif  // DISTAUG_CYCLEGAN_HPP_
