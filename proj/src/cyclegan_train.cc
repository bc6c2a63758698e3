// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "distaug/cyclegan.hpp"
#include "distaug/wav.hpp"

namespace distaug {
namespace cyclegan {

namespace {

constexpr double kProbClamp = 1e-7;

bool in_clamp_range(double p) {
  return p >= kProbClamp && p <= 1.0 - kProbClamp;
}

double clamp_prob(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

uint64_t mix_seed(uint64_t seed, const char* tag) {
  uint64_t h = 14695981039346656037ull ^ seed;
  for (const char* p = tag; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 1099511628211ull;
  }
  return h;
}

// d/dp of the discriminator's per-band objective, divided by the element
// count for the mean reduction.
nn::Tensor d_obj_grad(const nn::Tensor& p, bool real, GanLossVariant v) {
  nn::Tensor g = nn::Tensor::zeros_like(p);
  const double n = static_cast<double>(p.data.size());
  for (size_t i = 0; i < p.data.size(); ++i) {
    const double x = p.data[i];
    if (v == GanLossVariant::log_loss) {
      // D minimizes -log D(real) - log(1 - D(fake)).
      if (!in_clamp_range(x)) continue;
      g.data[i] = real ? -1.0 / (n * clamp_prob(x))
                       : 1.0 / (n * (1.0 - clamp_prob(x)));
    } else {
      // D minimizes (D(real) - 1)^2 + D(fake)^2.
      g.data[i] = real ? 2.0 * (x - 1.0) / n : 2.0 * x / n;
    }
  }
  return g;
}

// d/dp of the generator's adversarial term per band.
nn::Tensor g_obj_grad(const nn::Tensor& p, GanLossVariant v) {
  nn::Tensor g = nn::Tensor::zeros_like(p);
  const double n = static_cast<double>(p.data.size());
  for (size_t i = 0; i < p.data.size(); ++i) {
    const double x = p.data[i];
    if (v == GanLossVariant::log_loss) {
      // G minimizes log(1 - D(G(s))), the saturating form.
      if (!in_clamp_range(x)) continue;
      g.data[i] = -1.0 / (n * (1.0 - clamp_prob(x)));
    } else {
      // G minimizes (D(G(s)) - 1)^2.
      g.data[i] = 2.0 * (x - 1.0) / n;
    }
  }
  return g;
}

double band_real_value(const nn::Tensor& p, GanLossVariant v) {
  double s = 0.0;
  if (v == GanLossVariant::log_loss)
    for (double x : p.data) s += std::log(clamp_prob(x));
  else
    for (double x : p.data) s += (x - 1.0) * (x - 1.0);
  return s / static_cast<double>(p.data.size());
}

double band_fake_value(const nn::Tensor& p, GanLossVariant v) {
  double s = 0.0;
  if (v == GanLossVariant::log_loss)
    for (double x : p.data) s += std::log(1.0 - clamp_prob(x));
  else
    for (double x : p.data) s += x * x;
  return s / static_cast<double>(p.data.size());
}

void add_band(nn::Tensor* full, const nn::Tensor& band, int col0) {
  const int N = band.dim(0), T = band.dim(2), W = band.dim(3);
  for (int n = 0; n < N; ++n)
    for (int t = 0; t < T; ++t)
      for (int f = 0; f < W; ++f)
        full->at4(n, 0, t, col0 + f) += band.at4(n, 0, t, f);
}

void zero_all(const std::vector<nn::Tensor*>& grads) {
  for (nn::Tensor* g : grads) std::fill(g->data.begin(), g->data.end(), 0.0);
}

// Discriminator update for one bank against a real/fake band pair.
void disc_bank_step(std::vector<nn::Network>* bank,
                    const std::vector<nn::Tensor>& real_bands,
                    const std::vector<nn::Tensor>& fake_bands,
                    GanLossVariant v) {
  for (size_t i = 0; i < bank->size(); ++i) {
    nn::Network& d = (*bank)[i];
    nn::Trace tr;
    const nn::Tensor pr = d.forward(real_bands[i], &tr);
    d.backward(tr, d_obj_grad(pr, /*real=*/true, v));
    nn::Trace tf;
    const nn::Tensor pf = d.forward(fake_bands[i], &tf);
    d.backward(tf, d_obj_grad(pf, /*real=*/false, v));
  }
}

struct DirectionResult {
  double adv = 0.0;  // full Eq. (2)-style value for the history
  double cyc = 0.0;
};

// One direction of the generator phase: src --gen--> fake --rec--> back.
// Accumulates gradients in gen/rec (and, incidentally, the frozen bank;
// the caller zeroes those before the next discriminator phase).
DirectionResult generator_direction(nn::Network* gen, nn::Network* rec,
                                    std::vector<nn::Network>* bank,
                                    const nn::Tensor& src,
                                    const nn::Tensor& real_other,
                                    const SubbandSplit& split, Side fake_side,
                                    double lambda, GanLossVariant v) {
  DirectionResult out;
  nn::Trace tr_gen;
  const nn::Tensor fake = gen->forward(src, &tr_gen);
  nn::Tensor dfake = nn::Tensor::zeros_like(fake);

  const auto fake_bands = split_bands_tensor(fake, split, fake_side);
  const auto real_bands = split_bands_tensor(real_other, split, fake_side);
  const auto edges = split.band_edges(fake_side);
  if (fake_bands.size() != bank->size())
    throw BandCountMismatch(fake_bands.size(), bank->size());
  for (size_t i = 0; i < bank->size(); ++i) {
    nn::Network& d = (*bank)[i];
    out.adv += band_real_value(d.forward(real_bands[i], nullptr), v);
    nn::Trace td;
    const nn::Tensor pf = d.forward(fake_bands[i], &td);
    out.adv += band_fake_value(pf, v);
    const nn::Tensor dband = d.backward(td, g_obj_grad(pf, v));
    add_band(&dfake, dband, edges[i]);
  }

  nn::Trace tr_rec;
  const nn::Tensor recon = rec->forward(fake, &tr_rec);
  if (!recon.same_shape(src))
    throw nn::ShapeMismatch("cycle reconstruction changed shape");
  const double numel = static_cast<double>(recon.data.size());
  nn::Tensor drecon = nn::Tensor::zeros_like(recon);
  for (size_t i = 0; i < recon.data.size(); ++i) {
    const double diff = recon.data[i] - src.data[i];
    out.cyc += std::abs(diff);
    drecon.data[i] = diff > 0.0 ? lambda / numel
                   : diff < 0.0 ? -lambda / numel
                                : 0.0;
  }
  out.cyc /= numel;
  const nn::Tensor dfake_cyc = rec->backward(tr_rec, drecon);
  for (size_t i = 0; i < dfake.data.size(); ++i)
    dfake.data[i] += dfake_cyc.data[i];
  gen->backward(tr_gen, dfake);
  return out;
}

}  // namespace

std::vector<Matrix> load_patch_corpus(const std::string& wav_dir,
                                      const GanConfig& cfg, NormStats* stats) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(wav_dir))
    throw GanError("not a directory: " + wav_dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(wav_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());

  std::vector<Matrix> logmags;
  for (const std::string& p : paths) {
    const Waveform w = read_wav(p);
    if (w.sample_rate_hz != cfg.sample_rate_hz)
      throw SampleRateMismatch(w.sample_rate_hz, cfg.sample_rate_hz);
    logmags.push_back(log_magnitude(stft(w, cfg.stft)));
  }

  std::vector<const Matrix*> ptrs;
  ptrs.reserve(logmags.size());
  for (const Matrix& m : logmags) ptrs.push_back(&m);
  if (stats) {
    *stats = logmags.empty() ? NormStats::identity(cfg.stft.num_bins())
                             : compute_norm_stats(ptrs);
  }
  const NormStats& st =
      stats ? *stats : NormStats::identity(cfg.stft.num_bins());

  std::vector<Matrix> patches;
  const int Tp = cfg.patch_frames;
  const int step = std::max(1, Tp / 2);
  for (const Matrix& lm : logmags) {
    Matrix feat = normalize(lm, st);
    for (double& v : feat.v) v /= cfg.feature_scale;
    for (int pos = 0; pos + Tp <= feat.rows; pos += step) {
      Matrix patch(Tp, feat.cols);
      for (int t = 0; t < Tp; ++t)
        for (int f = 0; f < feat.cols; ++f)
          patch.at(t, f) = feat.at(pos + t, f);
      patches.push_back(std::move(patch));
    }
  }
  return patches;
}

TrainResult train_cyclegan(GanModel* model,
                           const std::vector<Matrix>& clean_patches,
                           const std::vector<Matrix>& noisy_patches,
                           const TrainSchedule& sched) {
  if (clean_patches.empty()) throw EmptyCorpus("clean");
  if (noisy_patches.empty()) throw EmptyCorpus("noisy");
  const GanConfig& cfg = model->config;
  const int Tp = cfg.patch_frames, Fb = cfg.stft.num_bins();
  for (const auto* pool : {&clean_patches, &noisy_patches})
    if ((*pool)[0].rows != Tp || (*pool)[0].cols != Fb)
      throw nn::ShapeMismatch("patch pool does not match model geometry");

  nn::Adam adam_g(model->generator_params(), model->generator_grads(),
                  cfg.adam);
  nn::Adam adam_d(model->discriminator_params(), model->discriminator_grads(),
                  cfg.adam);
  std::mt19937_64 rng(mix_seed(sched.seed, "batches"));

  TrainResult res;
  res.history.reserve(static_cast<size_t>(std::max(0, sched.steps)));
  const GanLossVariant v = cfg.loss;

  auto save_now = [&](const std::string& path) {
    const OptimizerBlob gb = blob_from_adam(adam_g);
    const OptimizerBlob db = blob_from_adam(adam_d);
    save_checkpoint_parts(model, gb, db, path);
  };

  for (int step = 1; step <= sched.steps; ++step) {
    std::vector<Matrix> cb, nb;
    cb.reserve(static_cast<size_t>(cfg.batch_size));
    nb.reserve(static_cast<size_t>(cfg.batch_size));
    for (int b = 0; b < cfg.batch_size; ++b) {
      cb.push_back(clean_patches[rng() % clean_patches.size()]);
      nb.push_back(noisy_patches[rng() % noisy_patches.size()]);
    }
    const nn::Tensor clean = patches_to_tensor(cb);
    const nn::Tensor noisy = patches_to_tensor(nb);

    LossRow row;
    row.step = step;
    try {
      // Discriminator phase against the current generators.
      zero_all(model->discriminator_grads());
      const nn::Tensor fake_noisy = model->G.forward(clean, nullptr);
      const nn::Tensor fake_clean = model->F.forward(noisy, nullptr);
      disc_bank_step(&model->D_X,
                     split_bands_tensor(noisy, model->split, Side::noisy),
                     split_bands_tensor(fake_noisy, model->split, Side::noisy),
                     v);
      disc_bank_step(&model->D_S,
                     split_bands_tensor(clean, model->split, Side::clean),
                     split_bands_tensor(fake_clean, model->split, Side::clean),
                     v);
      adam_d.step();

      // Generator phase through the frozen discriminators.
      zero_all(model->generator_grads());
      const DirectionResult fwd = generator_direction(
          &model->G, &model->F, &model->D_X, clean, noisy, model->split,
          Side::noisy, cfg.lambda_cyc, v);
      const DirectionResult bwd = generator_direction(
          &model->F, &model->G, &model->D_S, noisy, clean, model->split,
          Side::clean, cfg.lambda_cyc, v);
      adam_g.step();

      row.adv_g = fwd.adv;
      row.adv_f = bwd.adv;
      row.cyc = fwd.cyc + bwd.cyc;
      row.total = row.adv_g + row.adv_f + cfg.lambda_cyc * row.cyc;
    } catch (const nn::NonFiniteActivation&) {
      throw DivergenceDetected(step);
    }
    if (!std::isfinite(row.total)) throw DivergenceDetected(step);
    res.history.push_back(row);

    if (sched.checkpoint_every > 0 && !sched.checkpoint_path.empty() &&
        step % sched.checkpoint_every == 0 && step != sched.steps) {
      save_now(sched.checkpoint_path + "." + std::to_string(step));
    }
  }

  if (!sched.checkpoint_path.empty()) save_now(sched.checkpoint_path);
  if (!sched.history_csv_path.empty())
    write_history_csv(res.history, sched.history_csv_path);
  return res;
}

void write_history_csv(const std::vector<LossRow>& history,
                       const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw GanError("cannot open history file: " + path);
  std::fprintf(f, "step,adv_G,adv_F,cyc,total\n");
  for (const LossRow& r : history)
    std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g\n", r.step, r.adv_g, r.adv_f,
                 r.cyc, r.total);
  std::fclose(f);
}

}  // namespace cyclegan
}  // namespace distaug
