// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_PIPELINE_HPP_
#define DISTAUG_PIPELINE_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "distaug/matrix.hpp"

#include "json.hpp"

namespace distaug {
namespace pipeline {

struct ConfigInvalid : std::runtime_error {
  std::string field;
  ConfigInvalid(const std::string& field_path, const std::string& why)
      : std::runtime_error("config error at " + field_path + ": " + why),
        field(field_path) {}
};

struct StageFailed : std::runtime_error {
  std::string stage;
  StageFailed(const std::string& stage_name, const std::string& cause)
      : std::runtime_error("stage " + stage_name + " failed: " + cause),
        stage(stage_name) {}
};

enum class StageKind {
  speed,
  rir,
  tts_aug,
  mix,
  cgan_train,
  cgan_apply,
  pl_filter,
  specaug,
  assemble,
};

const char* stage_kind_name(StageKind k);
StageKind stage_kind_from_string(const std::string& s);

struct StageConfig {
  std::string name;
  StageKind kind = StageKind::assemble;
  nlohmann::json params;  // validated at load, consumed at execution
};

// Declarative stage sequence; every stage's parameters are checked
// against its module's preconditions when the config is loaded, so a
// run never starts work it would later reject for static reasons.
struct PipelineConfig {
  uint64_t root_seed = 0;
  int jobs = 1;
  std::string report_path;
  std::vector<StageConfig> stages;

  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig from_file(const std::string& path);
};

// Executes stages in order. The effective root seed is DISTAUG_SEED when
// set, else config.root_seed; each stage derives its own seed from the
// stage name. Returns the machine-readable run report; if report_path is
// set, the report is also written there (including on stage failure,
// before StageFailed propagates).
nlohmann::json run(const PipelineConfig& config);

// Validates and executes one stage outside a pipeline (the standalone
// subcommands go through this). Returns the stage report fragment.
nlohmann::json run_single_stage(StageKind kind, const nlohmann::json& params,
                                uint64_t seed, int jobs);

// FNV-1a 64-bit over the file bytes, as a fixed-width hex string.
// Detects any byte-level drift between runs; not a cryptographic digest.
std::string file_checksum(const std::string& path);

// Feature matrix container used by the specaug stage:
// "DAUGFT01" magic, i32 rows, i32 cols, row-major f64 data.
void write_feature_file(const Matrix& m, const std::string& path);
Matrix read_feature_file(const std::string& path);

}  // namespace pipeline
}  // namespace distaug

#endif  // DISTAUG_PIPELINE_HPP_
