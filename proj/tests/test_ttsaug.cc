// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <atomic>
#include <cmath>
#include <complex>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

#include "distaug/fft.hpp"
#include "distaug/seeding.hpp"
#include "distaug/ttsaug.hpp"
#include "distaug/wav.hpp"
#include "support/testutil.hpp"

using namespace distaug;
using namespace distaug::ttsaug;

namespace {

constexpr double kPcm16Step = 1.0 / 32768.0;

CondDims small_dims() {
  CondDims d;
  d.xvector = 4;
  d.gst = 3;
  return d;
}

ConditioningVector vec(CondKind kind, std::vector<double> values,
                       const std::string& utt) {
  ConditioningVector v;
  v.kind = kind;
  v.values = std::move(values);
  v.source_utt = utt;
  return v;
}

SynthesisRequest request(const std::string& text, uint64_t seed) {
  SynthesisRequest req;
  req.text = text;
  req.xvector = vec(CondKind::xvector, {0.1, 0.2, 0.3, 0.4}, "u");
  req.gst = vec(CondKind::gst, {1.0, -1.0, 0.5}, "u");
  req.seed = seed;
  return req;
}

ConditioningTable full_table(const std::vector<std::string>& ids) {
  ConditioningTable table;
  for (const std::string& id : ids) {
    ConditioningEntry e;
    e.xvector = vec(CondKind::xvector, {0.1, 0.2, 0.3, 0.4}, id);
    e.gst = vec(CondKind::gst, {1.0, -1.0, 0.5}, id);
    e.has_xvector = e.has_gst = true;
    table[id] = e;
  }
  return table;
}

double max_abs_diff(const std::vector<double>& a,
                    const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double power(const std::vector<double>& x) {
  double p = 0.0;
  for (double v : x) p += v * v;
  return p;
}

}  // namespace

TEST_CASE("stub: output length is exactly proportional to byte count") {
  StubEngine engine;
  for (const std::string& text : {std::string("A"), std::string("HELLO"),
                                  std::string("\xE7\x8C\xAB")}) {  // 3 bytes
    const Waveform w = engine.synthesize(request(text, 1));
    CHECK(w.sample_rate_hz == StubEngine::kSampleRate);
    CHECK(w.samples.size() ==
          text.size() * static_cast<size_t>(StubEngine::kSamplesPerChar));
  }
}

TEST_CASE("stub: deterministic in (text, seed), sensitive to both") {
  StubEngine engine;
  const Waveform a = engine.synthesize(request("SAME TEXT", 7));
  const Waveform b = engine.synthesize(request("SAME TEXT", 7));
  CHECK(a.samples == b.samples);

  const Waveform c = engine.synthesize(request("SAME TEXT", 8));
  CHECK(a.samples != c.samples);
  const Waveform d = engine.synthesize(request("SAME TEXz", 7));
  CHECK(a.samples != d.samples);
}

TEST_CASE("stub: each byte maps to its own tone frequency") {
  StubEngine engine;
  // 'A' = 65 -> 700 Hz.
  const Waveform w = engine.synthesize(request("A", 3));
  std::vector<double> seg(w.samples.begin(), w.samples.end());
  seg.resize(4096, 0.0);
  const std::vector<std::complex<double>> bins = rfft(seg, 4096);
  size_t peak = 0;
  for (size_t i = 1; i < bins.size(); ++i)
    if (std::abs(bins[i]) > std::abs(bins[peak])) peak = i;
  const double peak_hz = static_cast<double>(peak) * 16000.0 / 4096.0;
  CHECK(peak_hz == doctest::Approx(700.0).epsilon(0.01));
  for (double v : w.samples) CHECK(std::abs(v) <= 0.3 + 1e-12);
}

TEST_CASE("stub: empty text rejected") {
  StubEngine engine;
  CHECK_THROWS_AS(engine.synthesize(request("", 1)), SynthesisFailed);
}

TEST_CASE("make_engine picks the stub or an http endpoint") {
  CHECK(make_engine("stub")->name() == "stub");
  CHECK(make_engine("http://127.0.0.1:7700")->name() ==
        "http://127.0.0.1:7700");
}

TEST_CASE("parse_snr_range: bounds, degenerate, infinity") {
  const SnrRange a = parse_snr_range("10:20");
  CHECK(a.lo_db == 10.0);
  CHECK(a.hi_db == 20.0);

  const SnrRange b = parse_snr_range("-5:3.5");
  CHECK(b.lo_db == -5.0);
  CHECK(b.hi_db == 3.5);

  const SnrRange c = parse_snr_range("15:15");
  CHECK(c.lo_db == c.hi_db);

  const SnrRange d = parse_snr_range("inf:inf");
  CHECK(std::isinf(d.lo_db));
  CHECK(std::isinf(d.hi_db));

  CHECK_THROWS_AS(parse_snr_range("20:10"), TtsError);
  CHECK_THROWS_AS(parse_snr_range("abc:3"), TtsError);
  CHECK_THROWS_AS(parse_snr_range("5"), TtsError);
  CHECK_THROWS_AS(parse_snr_range("-inf:0"), TtsError);
  CHECK_THROWS_AS(parse_snr_range("0:inf"), TtsError);
}

TEST_CASE("conditioning table: parses kinds, validates dimensions") {
  const std::string dir = testutil::temp_dir("cond");
  const std::string path = dir + "/table.tsv";
  testutil::write_text(path,
                       "u0\txvector\t1,2,3,4\n"
                       "u0\tgst\t0.5,-0.5,0\n"
                       "u1\txvector\t9,8,7,6\n");
  const ConditioningTable table = read_conditioning_table(path, small_dims());
  REQUIRE(table.size() == 2);
  CHECK(table.at("u0").has_xvector);
  CHECK(table.at("u0").has_gst);
  CHECK(table.at("u0").xvector.values == std::vector<double>{1, 2, 3, 4});
  CHECK(table.at("u0").gst.values == std::vector<double>{0.5, -0.5, 0});
  CHECK(table.at("u1").has_xvector);
  CHECK_FALSE(table.at("u1").has_gst);

  testutil::write_text(path, "u0\txvector\t1,2,3\n");  // 3 of 4 dims
  CHECK_THROWS_AS(read_conditioning_table(path, small_dims()), TtsError);
  testutil::write_text(path, "u0\tstyle\t1,2,3,4\n");
  CHECK_THROWS_AS(read_conditioning_table(path, small_dims()), TtsError);
  testutil::write_text(path, "u0\txvector\t1,x,3,4\n");
  CHECK_THROWS_AS(read_conditioning_table(path, small_dims()), TtsError);
  testutil::write_text(path, "u0 xvector 1,2,3,4\n");  // no tabs
  CHECK_THROWS_AS(read_conditioning_table(path, small_dims()), TtsError);
  CHECK_THROWS_AS(read_conditioning_table(dir + "/nope.tsv", small_dims()),
                  TtsError);
}

TEST_CASE("tts_augment: raw mode reproduces the engine output") {
  const std::string dir = testutil::temp_dir("tts-raw");
  std::vector<ManifestRecord> recs = {
      testutil::record("utt0", "unused0.wav", 1.0, "HELLO", Source::orig),
      testutil::record("utt1", "unused1.wav", 1.0, "WORLD AGAIN",
                       Source::orig, "spk7"),
  };
  const Manifest in = Manifest::from_records(recs);
  const ConditioningTable cond = full_table({"utt0", "utt1"});

  StubEngine engine;
  TtsAugmentOptions opts;
  opts.perturb = false;
  opts.seed = 5;
  opts.out_dir = dir + "/out";
  const TtsAugmentResult res =
      tts_augment(in, cond, &engine, {}, {}, opts);
  CHECK(res.failures.empty());
  REQUIRE(res.manifest.size() == 2);

  for (const ManifestRecord& r : res.manifest.records()) {
    const ManifestRecord* src = in.find(r.utt_id);
    REQUIRE(src != nullptr);
    CHECK(r.text == src->text);
    CHECK(r.source == Source::tts);
    CHECK(r.speaker_id == src->speaker_id);

    // Per-record engine seed is derived from (run seed, utt id).
    SynthesisRequest req = request(src->text, stable_hash64(5, r.utt_id));
    const Waveform want = engine.synthesize(req);
    CHECK(r.duration_s == doctest::Approx(want.duration_s()).epsilon(1e-12));
    const Waveform got = read_wav(r.audio_path);
    CHECK(got.samples.size() == want.samples.size());
    CHECK(max_abs_diff(got.samples, want.samples) <= kPcm16Step);
  }
}

TEST_CASE("tts_augment: runs are deterministic at the byte level") {
  std::vector<ManifestRecord> recs = {
      testutil::record("a", "x.wav", 1.0, "SOME WORDS", Source::orig),
      testutil::record("b", "y.wav", 1.0, "MORE WORDS", Source::orig),
  };
  const Manifest in = Manifest::from_records(recs);
  const ConditioningTable cond = full_table({"a", "b"});
  const std::vector<Waveform> rirs = {testutil::sine(600.0, 200, 16000, 0.2)};
  const std::vector<Waveform> noise = {testutil::white_noise(11, 32000)};

  auto run = [&](const std::string& out_dir) {
    StubEngine engine;
    TtsAugmentOptions opts;
    opts.seed = 42;
    opts.out_dir = out_dir;
    opts.snr = parse_snr_range("5:25");
    return tts_augment(in, cond, &engine, rirs, noise, opts);
  };
  const std::string d1 = testutil::temp_dir("tts-det1");
  const std::string d2 = testutil::temp_dir("tts-det2");
  const TtsAugmentResult r1 = run(d1 + "/o");
  const TtsAugmentResult r2 = run(d2 + "/o");
  REQUIRE(r1.manifest.size() == 2);
  REQUIRE(r2.manifest.size() == 2);
  for (size_t i = 0; i < r1.manifest.size(); ++i) {
    const std::string p1 = r1.manifest.records()[i].audio_path;
    const std::string p2 = r2.manifest.records()[i].audio_path;
    CHECK(testutil::read_bytes(p1) == testutil::read_bytes(p2));
  }
}

TEST_CASE("tts_augment: missing conditioning is a per-record failure") {
  std::vector<ManifestRecord> recs = {
      testutil::record("good", "x.wav", 1.0, "FINE", Source::orig),
      testutil::record("nocond", "y.wav", 1.0, "DROPPED", Source::orig),
      testutil::record("half", "z.wav", 1.0, "ALSO DROPPED", Source::orig),
  };
  const Manifest in = Manifest::from_records(recs);
  ConditioningTable cond = full_table({"good", "half"});
  cond["half"].has_gst = false;  // x-vector only

  StubEngine engine;
  TtsAugmentOptions opts;
  opts.perturb = false;
  opts.out_dir = testutil::temp_dir("tts-miss") + "/out";
  const TtsAugmentResult res = tts_augment(in, cond, &engine, {}, {}, opts);
  CHECK(res.manifest.size() == 1);
  CHECK(res.manifest.records()[0].utt_id == "good");
  REQUIRE(res.failures.size() == 2);
  CHECK(res.failures[0].utt_id == "nocond");
  CHECK(res.failures[1].utt_id == "half");
}

TEST_CASE("tts_augment: perturbation needs non-empty pools") {
  const Manifest in = Manifest::from_records(
      {testutil::record("u", "x.wav", 1.0, "TEXT", Source::orig)});
  StubEngine engine;
  TtsAugmentOptions opts;
  opts.out_dir = testutil::temp_dir("tts-pools") + "/out";
  CHECK_THROWS_AS(
      tts_augment(in, full_table({"u"}), &engine, {}, {}, opts), TtsError);
}

TEST_CASE("tts_augment: degenerate SNR with impulse RIR lands exactly") {
  const Manifest in = Manifest::from_records(
      {testutil::record("u", "x.wav", 1.0, "MEASURED UTTERANCE",
                        Source::orig)});
  const ConditioningTable cond = full_table({"u"});

  Waveform impulse;
  impulse.sample_rate_hz = 16000;
  impulse.samples = {1.0};
  const std::vector<Waveform> noise = {testutil::white_noise(3, 48000)};

  StubEngine engine;
  TtsAugmentOptions opts;
  opts.seed = 9;
  opts.snr = parse_snr_range("15:15");
  opts.out_dir = testutil::temp_dir("tts-snr") + "/out";
  const TtsAugmentResult res =
      tts_augment(in, cond, &engine, {impulse}, noise, opts);
  CHECK(res.failures.empty());
  REQUIRE(res.manifest.size() == 1);

  // The impulse RIR keeps the dry signal intact, so the residual against
  // a fresh synthesis is exactly the scaled noise.
  SynthesisRequest req = request("MEASURED UTTERANCE", stable_hash64(9, "u"));
  const Waveform dry = engine.synthesize(req);
  const Waveform mixed = read_wav(res.manifest.records()[0].audio_path);
  REQUIRE(mixed.samples.size() == dry.samples.size());
  std::vector<double> residual(mixed.samples.size());
  for (size_t i = 0; i < residual.size(); ++i)
    residual[i] = mixed.samples[i] - dry.samples[i];
  const double snr_db =
      10.0 * std::log10(power(dry.samples) / power(residual));
  // PCM16 quantization of the mix adds a little wideband error.
  CHECK(snr_db == doctest::Approx(15.0).epsilon(0.002));
}

TEST_CASE("load_wav_pool: sorted wav files only") {
  const std::string dir = testutil::temp_dir("pool");
  write_wav(dir + "/b.wav", testutil::sine(500.0, 800));
  write_wav(dir + "/a.wav", testutil::sine(900.0, 400));
  testutil::write_text(dir + "/ignore.txt", "not audio");
  const std::vector<Waveform> pool = load_wav_pool(dir);
  REQUIRE(pool.size() == 2);
  CHECK(pool[0].samples.size() == 400);  // a.wav first
  CHECK(pool[1].samples.size() == 800);
  CHECK_THROWS_AS(load_wav_pool(dir + "/missing"), TtsError);
}

TEST_CASE("http engine: dead endpoint raises EngineUnreachable") {
  HttpEngine engine("http://127.0.0.1:9");  // discard port, nothing listens
  CHECK_THROWS_AS(engine.synthesize(request("HI", 1)), EngineUnreachable);
}

TEST_CASE("http engine: full round trip against a local server") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::mutex body_mutex;
  std::string first_body;
  server.Post("/synthesize", [&](const httplib::Request& req,
                                 httplib::Response& res) {
    {
      std::lock_guard<std::mutex> lock(body_mutex);
      if (hits == 0) first_body = req.body;
    }
    ++hits;
    std::string text;
    try {
      text = nlohmann::json::parse(req.body)["text"].get<std::string>();
    } catch (...) {
      res.status = 400;
      return;
    }
    nlohmann::json out;
    out["sample_rate_hz"] = 16000;
    // One fixed sample per input byte keeps the check trivial.
    out["samples"] = std::vector<double>(text.size(), 0.25);
    res.set_content(out.dump(), "application/json");
  });

  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread serve([&server] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpEngine engine("http://127.0.0.1:" + std::to_string(port));
  const Waveform w = engine.synthesize(request("FOUR", 77));
  CHECK(w.sample_rate_hz == 16000);
  CHECK(w.samples == std::vector<double>(4, 0.25));
  CHECK(hits == 1);

  {
    std::lock_guard<std::mutex> lock(body_mutex);
    const nlohmann::json body = nlohmann::json::parse(first_body);
    CHECK(body.at("text").get<std::string>() == "FOUR");
    CHECK(body.at("seed").get<uint64_t>() == 77);
    CHECK(body.at("xvector").get<std::vector<double>>() ==
          std::vector<double>{0.1, 0.2, 0.3, 0.4});
    CHECK(body.at("gst").get<std::vector<double>>() ==
          std::vector<double>{1.0, -1.0, 0.5});
  }

  // The stub-compatible augment path works through HTTP as well.
  const Manifest in = Manifest::from_records(
      {testutil::record("u", "x.wav", 1.0, "ABC", Source::orig)});
  TtsAugmentOptions opts;
  opts.perturb = false;
  opts.out_dir = testutil::temp_dir("tts-http") + "/out";
  const TtsAugmentResult res =
      tts_augment(in, full_table({"u"}), &engine, {}, {}, opts);
  CHECK(res.failures.empty());
  CHECK(res.manifest.size() == 1);
  CHECK(read_wav(res.manifest.records()[0].audio_path).samples.size() == 3);

  server.stop();
  serve.join();
}

TEST_CASE("http engine: malformed engine responses fail the utterance") {
  httplib::Server server;
  server.Post("/synthesize", [](const httplib::Request&,
                                httplib::Response& res) {
    res.set_content("this is not json", "text/plain");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread serve([&server] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpEngine engine("http://127.0.0.1:" + std::to_string(port));
  CHECK_THROWS_AS(engine.synthesize(request("HI", 1)), SynthesisFailed);

  server.stop();
  serve.join();
}
