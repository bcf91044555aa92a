#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "armid/control/pid.hpp"
#include "armid/control/waypoints.hpp"
#include "armid/data/config.hpp"
#include "armid/model/types.hpp"
#include "armid/nn/encoder.hpp"
#include "armid/nn/train.hpp"

namespace armid::pipeline {

enum class Precision { Float32, Float64 };

struct StageToggles {
  bool generate = true;
  bool simulate = true;
  bool sample = true;
  bool train = true;
  bool evaluate = true;
  bool report = true;
};

/// Everything a run depends on. Dataset and encoder lists form a grid; every
/// (dataset, encoder) pair is one trained model.
struct PipelineConfig {
  int robots = 64;
  std::uint64_t seed = 1;
  int waypoints = 16;
  model::VariationRanges ranges;
  control::PidGains gains = control::PidGains::defaults(6);
  control::WaypointSampling sampling;
  double dt = 1e-3;
  std::vector<data::DatasetConfig> datasets{data::DatasetConfig{}};
  std::vector<nn::EncoderConfig> encoders{nn::EncoderConfig{}};
  nn::TrainConfig training;
  Precision precision = Precision::Float32;
  std::filesystem::path output = "runs/default";
  int workers = 0;  // 0: ARMID_WORKERS or hardware concurrency
  StageToggles stages;

  /// Throws armid::Error(Config) naming the offending field.
  void validate() const;
};

/// Strict JSON reader: unknown or mistyped fields are config errors that name
/// the field path. Missing fields keep their defaults.
PipelineConfig parse_config(std::string_view json_text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical JSON (sorted keys, every field present).
std::string config_to_json(const PipelineConfig& config);

/// ARMID_OUT replaces the output directory, ARMID_WORKERS the worker count.
void apply_env_overrides(PipelineConfig& config);

/// The shipped desk-scale preset: 64 robots, 4 waypoints, (16, 16, 16)
/// windows and a small encoder.
PipelineConfig desk_preset();

}  // namespace armid::pipeline
