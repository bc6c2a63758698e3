// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distaug/manifest.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace distaug {

using nlohmann::json;

const char* source_name(Source s) {
  switch (s) {
    case Source::orig: return "orig";
    case Source::tts: return "tts";
    case Source::cgan: return "cgan";
    case Source::pl: return "pl";
  }
  return "orig";
}

Source source_from_string(const std::string& s) {
  if (s == "orig") return Source::orig;
  if (s == "tts") return Source::tts;
  if (s == "cgan") return Source::cgan;
  if (s == "pl") return Source::pl;
  throw ManifestError("unknown source tag: " + s);
}

void ManifestRecord::validate() const {
  if (utt_id.empty()) throw ManifestError("empty utt_id");
  if (audio_path.empty()) throw ManifestError("empty audio_path for " + utt_id);
  if (!(duration_s > 0.0) || !std::isfinite(duration_s))
    throw ManifestError("non-positive duration for " + utt_id);
  // Pseudo-label text may be empty (empty hypothesis); other sources not.
  if (text.empty() && source != Source::pl)
    throw ManifestError("empty text for non-pl record " + utt_id);
}

Manifest Manifest::from_records(std::vector<ManifestRecord> records) {
  Manifest m;
  m.records_ = std::move(records);
  for (size_t i = 0; i < m.records_.size(); ++i) {
    m.records_[i].validate();
    auto [it, inserted] = m.by_id_.emplace(m.records_[i].utt_id, i);
    if (!inserted) throw DuplicateId(m.records_[i].utt_id);
  }
  return m;
}

std::array<size_t, 4> Manifest::provenance_counts() const {
  std::array<size_t, 4> counts = {0, 0, 0, 0};
  for (const auto& r : records_) counts[static_cast<int>(r.source)]++;
  return counts;
}

size_t Manifest::count(Source s) const {
  return provenance_counts()[static_cast<int>(s)];
}

double Manifest::total_hours() const {
  double secs = 0.0;
  for (const auto& r : records_) secs += r.duration_s;
  return secs / 3600.0;
}

bool Manifest::has_id(const std::string& utt_id) const {
  return by_id_.count(utt_id) > 0;
}

const ManifestRecord* Manifest::find(const std::string& utt_id) const {
  auto it = by_id_.find(utt_id);
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

std::string record_to_json(const ManifestRecord& rec) {
  json j;
  j["utt_id"] = rec.utt_id;
  j["audio_path"] = rec.audio_path;
  j["duration_s"] = rec.duration_s;
  j["text"] = rec.text;
  j["source"] = source_name(rec.source);
  if (!rec.speaker_id.empty()) j["speaker_id"] = rec.speaker_id;
  return j.dump();
}

ManifestRecord record_from_json(const std::string& line, int line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw MalformedRecord(line_no, e.what());
  }
  if (!j.is_object()) throw MalformedRecord(line_no, "not an object");
  ManifestRecord rec;
  try {
    rec.utt_id = j.at("utt_id").get<std::string>();
    rec.audio_path = j.at("audio_path").get<std::string>();
    rec.duration_s = j.at("duration_s").get<double>();
    rec.text = j.at("text").get<std::string>();
    rec.source = source_from_string(j.at("source").get<std::string>());
    if (j.contains("speaker_id"))
      rec.speaker_id = j.at("speaker_id").get<std::string>();
  } catch (const json::exception& e) {
    throw MalformedRecord(line_no, e.what());
  } catch (const ManifestError& e) {
    throw MalformedRecord(line_no, e.what());
  }
  try {
    rec.validate();
  } catch (const ManifestError& e) {
    throw MalformedRecord(line_no, e.what());
  }
  return rec;
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest: " + path);
  std::vector<ManifestRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    records.push_back(record_from_json(line, line_no));
  }
  return Manifest::from_records(std::move(records));
}

void write_manifest(const Manifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ManifestError("cannot write manifest: " + path);
  for (const auto& rec : m.records()) out << record_to_json(rec) << '\n';
  if (!out) throw ManifestError("short write to " + path);
}

namespace {

void check_uniform_source(const Manifest& m, Source expected,
                          const char* role) {
  for (const auto& r : m.records())
    if (r.source != expected)
      throw SourceTagMismatch(std::string("record ") + r.utt_id + " in " +
                              role + " input has source tag " +
                              source_name(r.source));
}

}  // namespace

Manifest assemble_combined(const Manifest& orig, const Manifest& tts,
                           const Manifest& cgan, const Manifest& pl) {
  check_uniform_source(orig, Source::orig, "orig");
  check_uniform_source(tts, Source::tts, "tts");
  check_uniform_source(cgan, Source::cgan, "cgan");
  check_uniform_source(pl, Source::pl, "pl");

  std::vector<ManifestRecord> merged;
  merged.reserve(orig.size() + tts.size() + cgan.size() + pl.size());
  std::map<std::string, bool> seen;

  auto add = [&](const Manifest& m, const char* suffix) {
    for (ManifestRecord rec : m.records()) {
      if (seen.count(rec.utt_id)) {
        rec.utt_id += suffix;
        if (seen.count(rec.utt_id)) throw DuplicateId(rec.utt_id);
      }
      seen.emplace(rec.utt_id, true);
      merged.push_back(std::move(rec));
    }
  };
  add(orig, "-orig");
  add(tts, "-tts");
  add(cgan, "-cgan");
  add(pl, "-pl");
  return Manifest::from_records(std::move(merged));
}

double combined_loss(const Manifest& m, const Scorer& scorer) {
  double total = 0.0;
  for (const auto& rec : m.records()) {
    double v;
    try {
      v = scorer(rec.audio_path, rec.text);
    } catch (const std::exception& e) {
      throw ScorerFailure(rec.utt_id, e.what());
    }
    if (!std::isfinite(v))
      throw ScorerFailure(rec.utt_id, "non-finite score");
    total += v;
  }
  return total;
}

}  // namespace distaug
