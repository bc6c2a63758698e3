// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_MANIFEST_HPP_
#define DISTAUG_MANIFEST_HPP_

#include <array>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace distaug {

struct ManifestError : std::runtime_error {
  explicit ManifestError(const std::string& msg) : std::runtime_error(msg) {}
};
struct MalformedRecord : ManifestError {
  int line_no;
  MalformedRecord(int line, const std::string& why)
      : ManifestError("malformed record at line " + std::to_string(line) +
                      ": " + why),
        line_no(line) {}
};
struct DuplicateId : ManifestError {
  std::string utt_id;
  explicit DuplicateId(const std::string& id)
      : ManifestError("duplicate utt_id: " + id), utt_id(id) {}
};
struct SourceTagMismatch : ManifestError {
  explicit SourceTagMismatch(const std::string& msg) : ManifestError(msg) {}
};
struct ScorerFailure : ManifestError {
  std::string utt_id;
  ScorerFailure(const std::string& id, const std::string& why)
      : ManifestError("scorer failed on " + id + ": " + why), utt_id(id) {}
};

// Non-fatal per-record processing failure, collected by the batch
// augmentation ops instead of aborting the run.
struct RecordFailure {
  std::string utt_id;
  std::string message;
};

enum class Source { orig, tts, cgan, pl };

const char* source_name(Source s);
Source source_from_string(const std::string& s);

struct ManifestRecord {
  std::string utt_id;
  std::string audio_path;
  double duration_s = 0.0;
  std::string text;
  Source source = Source::orig;
  std::string speaker_id;  // empty means absent

  // Throws ManifestError when a field-level invariant is broken.
  void validate() const;
};

// Ordered, append-validated record collection. Immutable once built; all
// accessors are const and safe to share across threads.
class Manifest {
 public:
  Manifest() = default;
  static Manifest from_records(std::vector<ManifestRecord> records);

  const std::vector<ManifestRecord>& records() const { return records_; }
  size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::array<size_t, 4> provenance_counts() const;  // indexed by Source
  size_t count(Source s) const;
  double total_hours() const;
  bool has_id(const std::string& utt_id) const;
  const ManifestRecord* find(const std::string& utt_id) const;

 private:
  std::vector<ManifestRecord> records_;
  std::map<std::string, size_t> by_id_;
};

// Line-delimited JSON, UTF-8, one record per line.
Manifest read_manifest(const std::string& path);
void write_manifest(const Manifest& m, const std::string& path);

std::string record_to_json(const ManifestRecord& rec);
ManifestRecord record_from_json(const std::string& line, int line_no);

// Union of the four per-source sets. Each input must be uniformly tagged
// with its role's source. Colliding utt_ids from the augmentation inputs
// get a "-tts"/"-cgan"/"-pl" suffix.
Manifest assemble_combined(const Manifest& orig, const Manifest& tts,
                           const Manifest& cgan, const Manifest& pl);

using Scorer =
    std::function<double(const std::string& audio_path, const std::string& text)>;

// Sum of scorer(record) over all records. Scorer exceptions are wrapped
// in ScorerFailure with the utterance id.
double combined_loss(const Manifest& m, const Scorer& scorer);

}  // namespace distaug

#endif  // DISTAUG_MANIFEST_HPP_
