#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "armid/data/config.hpp"
#include "armid/nn/encoder.hpp"
#include "armid/nn/metrics.hpp"
#include "armid/pipeline/config.hpp"

namespace armid::pipeline {

enum class Stage { Generate, Simulate, Sample, Train, Evaluate, Report };
const char* to_string(Stage stage) noexcept;

struct StageRecord {
  Stage stage = Stage::Generate;
  double seconds = 0.0;
  std::size_t computed = 0;  // items produced in this invocation
  std::size_t cached = 0;    // items reused from disk
};

struct FailureRecord {
  Stage stage = Stage::Generate;
  std::string kind;
  std::string message;
};

/// One (dataset, encoder) grid cell.
struct CellResult {
  data::DatasetConfig dataset;
  nn::EncoderConfig encoder;
  std::string dataset_key;
  std::string model_key;
  double effective_time = 0.0;
  double utilization = 0.0;
  std::size_t train_samples = 0;
  std::size_t val_samples = 0;
  int features = 0;
  int targets = 0;
  int epochs_run = 0;
  int best_epoch = -1;
  std::optional<nn::Metrics> val;
  std::optional<nn::Metrics> train;
};

struct RunReport {
  std::string config_hash;
  int robots = 0;
  std::map<std::string, int> episode_status;  // status name -> robot count
  std::vector<StageRecord> stages;
  std::vector<CellResult> cells;
  std::optional<FailureRecord> failure;
};

struct RunOptions {
  std::ostream* log = nullptr;  // progress lines; nullptr for silence
};

/// Runs stages in order up to and including `last`. Every stage output is
/// keyed by a content hash of its inputs and reused when present, so reruns
/// with an unchanged config recompute nothing. On a stage error the partial
/// report (with a failure record) is written before the error propagates.
RunReport run_pipeline(const PipelineConfig& config, Stage last = Stage::Report, const RunOptions& options = {});

/// Path of the machine-readable report inside the output directory.
std::filesystem::path report_path(const PipelineConfig& config);

}  // namespace armid::pipeline
