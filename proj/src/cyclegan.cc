// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distaug/cyclegan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "distaug/parallel.hpp"
#include "distaug/wav.hpp"

namespace distaug {
namespace cyclegan {

namespace {

constexpr double kProbClamp = 1e-7;

double clamp_prob(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

uint64_t mix_seed(uint64_t seed, const char* tag) {
  // FNV-1a over the tag, folded into the seed.
  uint64_t h = 14695981039346656037ull ^ seed;
  for (const char* p = tag; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

// ------------------------------------------------------------- subbands

void SubbandSplit::validate() const {
  if (num_bands_m < 1 || num_bands_n < 1)
    throw GanError("subband split: band counts must be >= 1");
  if (num_bins < std::max(num_bands_m, num_bands_n))
    throw GanError("subband split: fewer bins than bands");
}

std::vector<int> SubbandSplit::band_edges(Side side) const {
  validate();
  const int b = bands(side);
  const int base = num_bins / b;
  const int rem = num_bins % b;
  std::vector<int> edges(b + 1, 0);
  for (int i = 0; i < b; ++i)
    edges[i + 1] = edges[i] + base + (i < rem ? 1 : 0);
  return edges;
}

std::vector<Matrix> split_bands(const Matrix& patch, const SubbandSplit& split,
                                Side side) {
  if (patch.cols != split.num_bins)
    throw CoverageMismatch(patch.cols, split.num_bins);
  const std::vector<int> edges = split.band_edges(side);
  std::vector<Matrix> bands;
  bands.reserve(edges.size() - 1);
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    Matrix band(patch.rows, edges[i + 1] - edges[i]);
    for (int r = 0; r < patch.rows; ++r)
      for (int c = edges[i]; c < edges[i + 1]; ++c)
        band.at(r, c - edges[i]) = patch.at(r, c);
    bands.push_back(std::move(band));
  }
  return bands;
}

Matrix concat_bands(const std::vector<Matrix>& bands) {
  if (bands.empty()) return Matrix();
  int cols = 0;
  for (const Matrix& b : bands) {
    if (b.rows != bands[0].rows)
      throw GanError("concat_bands: row count mismatch");
    cols += b.cols;
  }
  Matrix out(bands[0].rows, cols);
  int off = 0;
  for (const Matrix& b : bands) {
    for (int r = 0; r < b.rows; ++r)
      for (int c = 0; c < b.cols; ++c) out.at(r, off + c) = b.at(r, c);
    off += b.cols;
  }
  return out;
}

// --------------------------------------------------------------- config

GanLossVariant loss_variant_from_string(const std::string& s) {
  if (s == "log") return GanLossVariant::log_loss;
  if (s == "least_squares") return GanLossVariant::least_squares;
  throw GanError("unknown loss variant: " + s);
}

const char* loss_variant_name(GanLossVariant v) {
  return v == GanLossVariant::log_loss ? "log" : "least_squares";
}

void GanConfig::validate() const {
  stft.validate();
  if (sample_rate_hz <= 0) throw GanError("config: sample_rate_hz must be > 0");
  if (patch_frames < 2) throw GanError("config: patch_frames must be >= 2");
  if (num_bands_m < 1 || num_bands_n < 1)
    throw GanError("config: band counts must be >= 1");
  if (lambda_cyc < 0.0) throw GanError("config: lambda_cyc must be >= 0");
  if (feature_scale <= 0.0) throw GanError("config: feature_scale must be > 0");
  if (gen_base_width < 1 || gen_downsamples < 0 || gen_resblocks < 0)
    throw GanError("config: bad generator shape parameters");
  if (disc_base_width < 1 || disc_layers < 2 || disc_kernel < 2)
    throw GanError("config: bad discriminator shape parameters");
  if (batch_size < 1) throw GanError("config: batch_size must be >= 1");
  if (steps < 0) throw GanError("config: steps must be >= 0");
  if (checkpoint_every < 0)
    throw GanError("config: checkpoint_every must be >= 0");
}

nlohmann::json GanConfig::to_json() const {
  nlohmann::json j;
  j["stft"] = {{"win_length", stft.win_length},
               {"hop_length", stft.hop_length},
               {"fft_size", stft.fft_size}};
  j["sample_rate_hz"] = sample_rate_hz;
  j["patch_frames"] = patch_frames;
  j["num_bands_m"] = num_bands_m;
  j["num_bands_n"] = num_bands_n;
  j["lambda_cyc"] = lambda_cyc;
  j["loss"] = loss_variant_name(loss);
  j["feature_scale"] = feature_scale;
  j["generator"] = {{"base_width", gen_base_width},
                    {"downsamples", gen_downsamples},
                    {"resblocks", gen_resblocks}};
  j["discriminator"] = {{"base_width", disc_base_width},
                        {"layers", disc_layers},
                        {"kernel", disc_kernel},
                        {"leaky_slope", leaky_slope}};
  j["adam"] = {{"learning_rate", adam.learning_rate},
               {"beta1", adam.beta1},
               {"beta2", adam.beta2},
               {"epsilon", adam.epsilon}};
  j["batch_size"] = batch_size;
  j["steps"] = steps;
  j["checkpoint_every"] = checkpoint_every;
  return j;
}

GanConfig GanConfig::from_json(const nlohmann::json& j) {
  GanConfig c;
  if (j.contains("stft")) {
    const auto& s = j.at("stft");
    c.stft.win_length = s.value("win_length", c.stft.win_length);
    c.stft.hop_length = s.value("hop_length", c.stft.hop_length);
    c.stft.fft_size = s.value("fft_size", c.stft.fft_size);
  }
  c.sample_rate_hz = j.value("sample_rate_hz", c.sample_rate_hz);
  c.patch_frames = j.value("patch_frames", c.patch_frames);
  c.num_bands_m = j.value("num_bands_m", c.num_bands_m);
  c.num_bands_n = j.value("num_bands_n", c.num_bands_n);
  c.lambda_cyc = j.value("lambda_cyc", c.lambda_cyc);
  if (j.contains("loss"))
    c.loss = loss_variant_from_string(j.at("loss").get<std::string>());
  c.feature_scale = j.value("feature_scale", c.feature_scale);
  if (j.contains("generator")) {
    const auto& g = j.at("generator");
    c.gen_base_width = g.value("base_width", c.gen_base_width);
    c.gen_downsamples = g.value("downsamples", c.gen_downsamples);
    c.gen_resblocks = g.value("resblocks", c.gen_resblocks);
  }
  if (j.contains("discriminator")) {
    const auto& d = j.at("discriminator");
    c.disc_base_width = d.value("base_width", c.disc_base_width);
    c.disc_layers = d.value("layers", c.disc_layers);
    c.disc_kernel = d.value("kernel", c.disc_kernel);
    c.leaky_slope = d.value("leaky_slope", c.leaky_slope);
  }
  if (j.contains("adam")) {
    const auto& a = j.at("adam");
    c.adam.learning_rate = a.value("learning_rate", c.adam.learning_rate);
    c.adam.beta1 = a.value("beta1", c.adam.beta1);
    c.adam.beta2 = a.value("beta2", c.adam.beta2);
    c.adam.epsilon = a.value("epsilon", c.adam.epsilon);
  }
  c.batch_size = j.value("batch_size", c.batch_size);
  c.steps = j.value("steps", c.steps);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.validate();
  return c;
}

GanConfig GanConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GanError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw GanError("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

// ---------------------------------------------------------------- model

std::vector<nn::LayerSpec> generator_specs(const GanConfig& cfg) {
  using nn::LayerKind;
  using nn::LayerSpec;
  std::vector<LayerSpec> specs;
  const int w = cfg.gen_base_width;
  specs.push_back(LayerSpec::conv(1, w, 7, 1, 3));
  specs.push_back(LayerSpec::inorm(w));
  specs.push_back(LayerSpec::activation(LayerKind::relu));
  int h = cfg.patch_frames, wd = cfg.stft.num_bins();
  std::vector<std::pair<int, int>> pre_shapes;
  int ch = w;
  for (int d = 0; d < cfg.gen_downsamples; ++d) {
    pre_shapes.emplace_back(h, wd);
    specs.push_back(LayerSpec::conv(ch, ch * 2, 3, 2, 1));
    specs.push_back(LayerSpec::inorm(ch * 2));
    specs.push_back(LayerSpec::activation(LayerKind::relu));
    h = (h + 2 - 3) / 2 + 1;
    wd = (wd + 2 - 3) / 2 + 1;
    ch *= 2;
  }
  for (int r = 0; r < cfg.gen_resblocks; ++r)
    specs.push_back(LayerSpec::resblock(ch, 3));
  for (int d = cfg.gen_downsamples - 1; d >= 0; --d) {
    const auto [th, tw] = pre_shapes[static_cast<size_t>(d)];
    const int oph = th - (2 * h - 1);
    const int opw = tw - (2 * wd - 1);
    if (oph < 0 || oph > 1 || opw < 0 || opw > 1)
      throw GanError("generator: cannot restore shape after downsampling");
    specs.push_back(LayerSpec::tconv(ch, ch / 2, 3, 2, 1, oph, opw));
    specs.push_back(LayerSpec::inorm(ch / 2));
    specs.push_back(LayerSpec::activation(LayerKind::relu));
    h = th;
    wd = tw;
    ch /= 2;
  }
  specs.push_back(LayerSpec::conv(ch, 1, 7, 1, 3));
  specs.push_back(LayerSpec::activation(LayerKind::tanh));
  return specs;
}

std::vector<nn::LayerSpec> discriminator_specs(const GanConfig& cfg,
                                               int band_bins) {
  using nn::LayerKind;
  using nn::LayerSpec;
  std::vector<LayerSpec> specs;
  const int k = cfg.disc_kernel;
  int h = cfg.patch_frames, wd = band_bins, ch = 1;
  int width = cfg.disc_base_width;
  for (int l = 0; l + 1 < cfg.disc_layers; ++l) {
    specs.push_back(LayerSpec::conv(ch, width, k, 2, 1));
    if (l > 0) specs.push_back(LayerSpec::inorm(width));
    specs.push_back(
        LayerSpec::activation(LayerKind::leaky_relu, cfg.leaky_slope));
    h = (h + 2 - k) / 2 + 1;
    wd = (wd + 2 - k) / 2 + 1;
    if (h < 1 || wd < 1)
      throw GanError("discriminator: patch collapsed before head");
    ch = width;
    width *= 2;
  }
  if (h + 2 - k < 0 || wd + 2 - k < 0)
    throw GanError("discriminator: patch smaller than head kernel");
  specs.push_back(LayerSpec::conv(ch, 1, k, 1, 1));
  specs.push_back(LayerSpec::activation(LayerKind::sigmoid));
  return specs;
}

GanModel build_gan_model(const GanConfig& cfg, uint64_t seed) {
  cfg.validate();
  GanModel m;
  m.config = cfg;
  m.split.num_bands_m = cfg.num_bands_m;
  m.split.num_bands_n = cfg.num_bands_n;
  m.split.num_bins = cfg.stft.num_bins();
  m.split.validate();
  const auto gspecs = generator_specs(cfg);
  {
    std::mt19937_64 rng(mix_seed(seed, "init/G"));
    m.G = nn::Network(gspecs, &rng);
  }
  {
    std::mt19937_64 rng(mix_seed(seed, "init/F"));
    m.F = nn::Network(gspecs, &rng);
  }
  const auto edges_s = m.split.band_edges(Side::clean);
  for (int i = 0; i < m.split.num_bands_m; ++i) {
    std::mt19937_64 rng(mix_seed(seed + i, "init/D_S"));
    m.D_S.emplace_back(discriminator_specs(cfg, edges_s[i + 1] - edges_s[i]),
                       &rng);
  }
  const auto edges_x = m.split.band_edges(Side::noisy);
  for (int i = 0; i < m.split.num_bands_n; ++i) {
    std::mt19937_64 rng(mix_seed(seed + i, "init/D_X"));
    m.D_X.emplace_back(discriminator_specs(cfg, edges_x[i + 1] - edges_x[i]),
                       &rng);
  }
  m.clean_stats = NormStats::identity(m.split.num_bins);
  m.noisy_stats = NormStats::identity(m.split.num_bins);
  return m;
}

std::vector<nn::Tensor*> GanModel::generator_params() {
  std::vector<nn::Tensor*> all = G.params();
  for (nn::Tensor* t : F.params()) all.push_back(t);
  return all;
}
std::vector<nn::Tensor*> GanModel::generator_grads() {
  std::vector<nn::Tensor*> all = G.grads();
  for (nn::Tensor* t : F.grads()) all.push_back(t);
  return all;
}
std::vector<nn::Tensor*> GanModel::discriminator_params() {
  std::vector<nn::Tensor*> all;
  for (auto& d : D_S)
    for (nn::Tensor* t : d.params()) all.push_back(t);
  for (auto& d : D_X)
    for (nn::Tensor* t : d.params()) all.push_back(t);
  return all;
}
std::vector<nn::Tensor*> GanModel::discriminator_grads() {
  std::vector<nn::Tensor*> all;
  for (auto& d : D_S)
    for (nn::Tensor* t : d.grads()) all.push_back(t);
  for (auto& d : D_X)
    for (nn::Tensor* t : d.grads()) all.push_back(t);
  return all;
}

// ------------------------------------------------------------- batching

void TrainBatch::validate() const {
  if (clean.ndim() != 4 || noisy.ndim() != 4)
    throw nn::ShapeMismatch("train batch: expected NCHW tensors");
  if (clean.dim(3) != noisy.dim(3))
    throw nn::ShapeMismatch("train batch: frequency dimension mismatch");
  if (!clean.all_finite() || !noisy.all_finite())
    throw GanError("train batch: non-finite values");
}

nn::Tensor patches_to_tensor(const std::vector<Matrix>& patches) {
  if (patches.empty()) throw GanError("patches_to_tensor: empty batch");
  const int r = patches[0].rows, c = patches[0].cols;
  nn::Tensor t({static_cast<int>(patches.size()), 1, r, c});
  size_t off = 0;
  for (const Matrix& p : patches) {
    if (p.rows != r || p.cols != c)
      throw nn::ShapeMismatch("patches_to_tensor: ragged patch sizes");
    std::copy(p.v.begin(), p.v.end(), t.data.begin() + off);
    off += p.v.size();
  }
  return t;
}

Matrix tensor_to_patch(const nn::Tensor& t, int item) {
  if (t.ndim() != 4 || t.dim(1) != 1)
    throw nn::ShapeMismatch("tensor_to_patch: expected N x 1 x T x F");
  Matrix m(t.dim(2), t.dim(3));
  const size_t off = static_cast<size_t>(item) * m.v.size();
  std::copy(t.data.begin() + off, t.data.begin() + off + m.v.size(),
            m.v.begin());
  return m;
}

std::vector<nn::Tensor> split_bands_tensor(const nn::Tensor& batch,
                                           const SubbandSplit& split,
                                           Side side) {
  if (batch.ndim() != 4 || batch.dim(1) != 1)
    throw nn::ShapeMismatch("split_bands_tensor: expected N x 1 x T x F");
  if (batch.dim(3) != split.num_bins)
    throw CoverageMismatch(batch.dim(3), split.num_bins);
  const std::vector<int> edges = split.band_edges(side);
  const int N = batch.dim(0), T = batch.dim(2);
  std::vector<nn::Tensor> bands;
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    nn::Tensor band({N, 1, T, edges[i + 1] - edges[i]});
    for (int n = 0; n < N; ++n)
      for (int t = 0; t < T; ++t)
        for (int f = edges[i]; f < edges[i + 1]; ++f)
          band.at4(n, 0, t, f - edges[i]) = batch.at4(n, 0, t, f);
    bands.push_back(std::move(band));
  }
  return bands;
}

// --------------------------------------------------------------- losses

namespace {

double mean_value(const nn::Tensor& t) {
  double s = 0.0;
  for (double v : t.data) s += v;
  return s / static_cast<double>(t.data.size());
}

double band_real_term(const nn::Tensor& p, GanLossVariant v) {
  double s = 0.0;
  if (v == GanLossVariant::log_loss) {
    for (double x : p.data) s += std::log(clamp_prob(x));
  } else {
    for (double x : p.data) s += (x - 1.0) * (x - 1.0);
  }
  return s / static_cast<double>(p.data.size());
}

double band_fake_term(const nn::Tensor& p, GanLossVariant v) {
  double s = 0.0;
  if (v == GanLossVariant::log_loss) {
    for (double x : p.data) s += std::log(1.0 - clamp_prob(x));
  } else {
    for (double x : p.data) s += x * x;
  }
  return s / static_cast<double>(p.data.size());
}

}  // namespace

double adv_loss(const std::vector<nn::Tensor>& fake_bands,
                const std::vector<nn::Tensor>& real_bands,
                const std::vector<nn::Network>& bank, GanLossVariant variant) {
  if (fake_bands.size() != bank.size())
    throw BandCountMismatch(fake_bands.size(), bank.size());
  if (real_bands.size() != bank.size())
    throw BandCountMismatch(real_bands.size(), bank.size());
  double loss = 0.0;
  for (size_t i = 0; i < bank.size(); ++i) {
    const nn::Tensor pr = bank[i].forward(real_bands[i], nullptr);
    const nn::Tensor pf = bank[i].forward(fake_bands[i], nullptr);
    loss += band_real_term(pr, variant) + band_fake_term(pf, variant);
  }
  return loss;
}

double cycle_loss(const nn::Network& G, const nn::Network& F,
                  const nn::Tensor& clean, const nn::Tensor& noisy) {
  const nn::Tensor s_rec = F.forward(G.forward(clean, nullptr), nullptr);
  if (!s_rec.same_shape(clean))
    throw nn::ShapeMismatch("cycle_loss: F(G(clean)) shape " +
                            s_rec.shape_str() + " vs clean " +
                            clean.shape_str());
  const nn::Tensor x_rec = G.forward(F.forward(noisy, nullptr), nullptr);
  if (!x_rec.same_shape(noisy))
    throw nn::ShapeMismatch("cycle_loss: G(F(noisy)) shape mismatch");
  double a = 0.0, b = 0.0;
  for (size_t i = 0; i < s_rec.data.size(); ++i)
    a += std::abs(s_rec.data[i] - clean.data[i]);
  for (size_t i = 0; i < x_rec.data.size(); ++i)
    b += std::abs(x_rec.data[i] - noisy.data[i]);
  return a / static_cast<double>(s_rec.data.size()) +
         b / static_cast<double>(x_rec.data.size());
}

LossBreakdown total_loss(const GanModel& model, const TrainBatch& batch) {
  batch.validate();
  LossBreakdown out;
  const nn::Tensor fake_noisy = model.G.forward(batch.clean, nullptr);
  const nn::Tensor fake_clean = model.F.forward(batch.noisy, nullptr);
  out.adv_g = adv_loss(split_bands_tensor(fake_noisy, model.split, Side::noisy),
                       split_bands_tensor(batch.noisy, model.split, Side::noisy),
                       model.D_X, model.config.loss);
  out.adv_f = adv_loss(split_bands_tensor(fake_clean, model.split, Side::clean),
                       split_bands_tensor(batch.clean, model.split, Side::clean),
                       model.D_S, model.config.loss);
  out.cyc = cycle_loss(model.G, model.F, batch.clean, batch.noisy);
  out.total = out.adv_g + out.adv_f + model.config.lambda_cyc * out.cyc;
  return out;
}

// ----------------------------------------------------------- checkpoint

namespace {

void put_u32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_u64(std::ostream& os, uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_i32(std::ostream& os, int32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

uint32_t get_u32(std::istream& is) {
  uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
    throw CheckpointError("truncated file");
  return v;
}
uint64_t get_u64(std::istream& is) {
  uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
    throw CheckpointError("truncated file");
  return v;
}
int32_t get_i32(std::istream& is) {
  int32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
    throw CheckpointError("truncated file");
  return v;
}
double get_f64(std::istream& is) {
  double v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
    throw CheckpointError("truncated file");
  return v;
}

constexpr char kMagic[8] = {'D', 'A', 'U', 'G', 'G', 'A', 'N', '1'};
constexpr uint32_t kVersion = 1;

void put_stats(std::ostream& os, const NormStats& s) {
  put_u32(os, static_cast<uint32_t>(s.mean.size()));
  for (double v : s.mean) put_f64(os, v);
  for (double v : s.std) put_f64(os, v);
}

NormStats get_stats(std::istream& is) {
  NormStats s;
  const uint32_t n = get_u32(is);
  s.mean.resize(n);
  s.std.resize(n);
  for (double& v : s.mean) v = get_f64(is);
  for (double& v : s.std) v = get_f64(is);
  return s;
}

void put_network(std::ostream& os, nn::Network& net) {
  const auto& specs = net.specs();
  put_u32(os, static_cast<uint32_t>(specs.size()));
  for (const nn::LayerSpec& s : specs) {
    put_u32(os, static_cast<uint32_t>(s.kind));
    put_i32(os, s.in_channels);
    put_i32(os, s.out_channels);
    put_i32(os, s.kernel);
    put_i32(os, s.stride);
    put_i32(os, s.padding);
    put_i32(os, s.output_pad_h);
    put_i32(os, s.output_pad_w);
    put_f64(os, s.negative_slope);
  }
  const auto params = net.params();
  put_u32(os, static_cast<uint32_t>(params.size()));
  for (const nn::Tensor* t : params) {
    put_u32(os, static_cast<uint32_t>(t->shape.size()));
    for (int d : t->shape) put_i32(os, d);
    for (double v : t->data) put_f64(os, v);
  }
}

nn::Network get_network(std::istream& is) {
  const uint32_t num_layers = get_u32(is);
  std::vector<nn::LayerSpec> specs(num_layers);
  for (nn::LayerSpec& s : specs) {
    s.kind = static_cast<nn::LayerKind>(get_u32(is));
    s.in_channels = get_i32(is);
    s.out_channels = get_i32(is);
    s.kernel = get_i32(is);
    s.stride = get_i32(is);
    s.padding = get_i32(is);
    s.output_pad_h = get_i32(is);
    s.output_pad_w = get_i32(is);
    s.negative_slope = get_f64(is);
  }
  nn::Network net(specs, nullptr);
  const uint32_t num_params = get_u32(is);
  auto params = net.params();
  if (num_params != params.size())
    throw CheckpointError("parameter tensor count mismatch");
  for (nn::Tensor* t : params) {
    const uint32_t ndim = get_u32(is);
    std::vector<int> shape(ndim);
    for (int& d : shape) d = get_i32(is);
    if (shape != t->shape) throw CheckpointError("parameter shape mismatch");
    for (double& v : t->data) v = get_f64(is);
  }
  return net;
}

void put_blob(std::ostream& os, const OptimizerBlob& b) {
  put_u64(os, b.step_count);
  put_u32(os, static_cast<uint32_t>(b.m.size()));
  for (size_t i = 0; i < b.m.size(); ++i) {
    put_u64(os, b.m[i].size());
    for (double v : b.m[i]) put_f64(os, v);
    for (double v : b.v[i]) put_f64(os, v);
  }
}

OptimizerBlob get_blob(std::istream& is) {
  OptimizerBlob b;
  b.step_count = get_u64(is);
  const uint32_t n = get_u32(is);
  b.m.resize(n);
  b.v.resize(n);
  for (uint32_t i = 0; i < n; ++i) {
    const uint64_t count = get_u64(is);
    b.m[i].resize(count);
    b.v[i].resize(count);
    for (double& v : b.m[i]) v = get_f64(is);
    for (double& v : b.v[i]) v = get_f64(is);
  }
  return b;
}

}  // namespace

void save_checkpoint_parts(GanModel* model, const OptimizerBlob& gen_opt,
                           const OptimizerBlob& disc_opt,
                           const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("cannot open for writing: " + path);
  os.write(kMagic, sizeof kMagic);
  put_u32(os, kVersion);
  const std::string cfg = model->config.to_json().dump();
  put_u32(os, static_cast<uint32_t>(cfg.size()));
  os.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  put_stats(os, model->clean_stats);
  put_stats(os, model->noisy_stats);
  put_u32(os,
          static_cast<uint32_t>(2 + model->D_S.size() + model->D_X.size()));
  put_network(os, model->G);
  put_network(os, model->F);
  for (auto& d : model->D_S) put_network(os, d);
  for (auto& d : model->D_X) put_network(os, d);
  put_blob(os, gen_opt);
  put_blob(os, disc_opt);
  if (!os) throw CheckpointError("write failed: " + path);
}

void save_checkpoint(Checkpoint* ck, const std::string& path) {
  save_checkpoint_parts(&ck->model, ck->gen_opt, ck->disc_opt, path);
}

OptimizerBlob blob_from_adam(const nn::Adam& opt) {
  OptimizerBlob b;
  b.step_count = opt.step_count();
  for (const nn::Tensor& t : opt.first_moments()) b.m.push_back(t.data);
  for (const nn::Tensor& t : opt.second_moments()) b.v.push_back(t.data);
  return b;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open: " + path);
  char magic[8];
  if (!is.read(magic, sizeof magic) ||
      std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw CheckpointError("bad magic in " + path);
  const uint32_t version = get_u32(is);
  if (version != kVersion)
    throw CheckpointError("unsupported version " + std::to_string(version));
  const uint32_t cfg_len = get_u32(is);
  std::string cfg_str(cfg_len, '\0');
  if (!is.read(cfg_str.data(), cfg_len))
    throw CheckpointError("truncated config");
  Checkpoint ck;
  try {
    ck.model.config = GanConfig::from_json(nlohmann::json::parse(cfg_str));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("config parse error: ") + e.what());
  }
  ck.model.split.num_bands_m = ck.model.config.num_bands_m;
  ck.model.split.num_bands_n = ck.model.config.num_bands_n;
  ck.model.split.num_bins = ck.model.config.stft.num_bins();
  ck.model.clean_stats = get_stats(is);
  ck.model.noisy_stats = get_stats(is);
  const uint32_t num_networks = get_u32(is);
  const uint32_t expected = 2 + static_cast<uint32_t>(
      ck.model.config.num_bands_m + ck.model.config.num_bands_n);
  if (num_networks != expected)
    throw CheckpointError("network count mismatch");
  ck.model.G = get_network(is);
  ck.model.F = get_network(is);
  for (int i = 0; i < ck.model.config.num_bands_m; ++i)
    ck.model.D_S.push_back(get_network(is));
  for (int i = 0; i < ck.model.config.num_bands_n; ++i)
    ck.model.D_X.push_back(get_network(is));
  ck.gen_opt = get_blob(is);
  ck.disc_opt = get_blob(is);
  return ck;
}

// ---------------------------------------------------- clean -> noisy map

Waveform map_clean_to_noisy(const GanModel& model, const Waveform& w) {
  const GanConfig& cfg = model.config;
  const ComplexSpectrogram spec = stft(w, cfg.stft);
  const int T = spec.num_frames, Fb = spec.num_bins;
  const int Tp = cfg.patch_frames;
  if (T < Tp) throw TooShort(T, Tp);

  Matrix feat = normalize(log_magnitude(spec), model.clean_stats);
  for (double& v : feat.v) v /= cfg.feature_scale;

  std::vector<int> starts;
  const int step = std::max(1, Tp / 2);
  for (int pos = 0; pos + Tp <= T; pos += step) starts.push_back(pos);
  if (starts.back() + Tp < T) starts.push_back(T - Tp);

  Matrix acc(T, Fb);
  std::vector<double> wsum(static_cast<size_t>(T), 0.0);
  for (int pos : starts) {
    nn::Tensor in({1, 1, Tp, Fb});
    for (int t = 0; t < Tp; ++t)
      for (int f = 0; f < Fb; ++f) in.at4(0, 0, t, f) = feat.at(pos + t, f);
    const nn::Tensor out = model.G.forward(in, nullptr);
    if (!out.same_shape(in))
      throw nn::ShapeMismatch("generator changed patch shape");
    for (int t = 0; t < Tp; ++t) {
      const double wt = std::min(t + 1, Tp - t);
      wsum[static_cast<size_t>(pos + t)] += wt;
      for (int f = 0; f < Fb; ++f)
        acc.at(pos + t, f) += wt * out.at4(0, 0, t, f);
    }
  }
  for (int t = 0; t < T; ++t)
    for (int f = 0; f < Fb; ++f) acc.at(t, f) /= wsum[static_cast<size_t>(t)];

  for (double& v : acc.v) v *= cfg.feature_scale;
  const Matrix logmag = denormalize(acc, model.noisy_stats);

  ComplexSpectrogram mapped = spec;
  for (int t = 0; t < T; ++t)
    for (int f = 0; f < Fb; ++f) {
      const double mag = std::max(0.0, std::exp(logmag.at(t, f)) - 1e-6);
      const std::complex<double> c = spec.at(t, f);
      const double a = std::abs(c);
      mapped.at(t, f) = a > 0.0 ? c * (mag / a)
                                : std::complex<double>(mag, 0.0);
    }

  Waveform out = istft(mapped);
  out.samples.resize(w.samples.size(), 0.0);
  out.sample_rate_hz = w.sample_rate_hz;
  return out;
}

AugmentResult augment_manifest_cgan(const GanModel& model, const Manifest& in,
                                    const std::string& out_dir, int jobs) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto& recs = in.records();
  std::vector<ManifestRecord> out(recs.size());
  std::vector<RecordFailure> fail(recs.size());
  std::vector<char> wrote(recs.size(), 0);
  parallel_for(recs.size(), jobs, [&](size_t i) {
    const ManifestRecord& rec = recs[i];
    try {
      Waveform w = read_wav(rec.audio_path);
      if (w.sample_rate_hz != model.config.sample_rate_hz)
        throw SampleRateMismatch(w.sample_rate_hz,
                                 model.config.sample_rate_hz);
      const Waveform mapped = map_clean_to_noisy(model, w);
      ManifestRecord r = rec;
      r.source = Source::cgan;
      r.audio_path = (fs::path(out_dir) / (rec.utt_id + ".wav")).string();
      r.duration_s = mapped.duration_s();
      write_wav(r.audio_path, mapped);
      out[i] = std::move(r);
      wrote[i] = 1;
    } catch (const std::exception& e) {
      fail[i] = {rec.utt_id, e.what()};
    }
  });
  AugmentResult result;
  std::vector<ManifestRecord> kept;
  for (size_t i = 0; i < recs.size(); ++i) {
    if (wrote[i])
      kept.push_back(std::move(out[i]));
    else
      result.failures.push_back(std::move(fail[i]));
  }
  result.manifest = Manifest::from_records(std::move(kept));
  return result;
}

}  // namespace cyclegan
}  // namespace distaug
