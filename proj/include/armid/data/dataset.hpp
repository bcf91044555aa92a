#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "armid/control/trajectory.hpp"
#include "armid/data/config.hpp"
#include "armid/data/features.hpp"
#include "armid/data/targets.hpp"
#include "armid/dyn/chain.hpp"

namespace armid::data {

/// Samples of one split. Features are count x seq_len x feature_count and
/// targets count x target_count, both row-major.
struct SampleSet {
  std::size_t count = 0;
  std::vector<double> features;
  std::vector<double> targets;
  std::vector<std::int64_t> robot_ids;
  std::vector<std::int32_t> offsets;
  std::vector<std::int32_t> windows;
};

struct Dataset {
  DatasetConfig config;
  int seq_len = 0;
  int feature_count = 0;
  int target_count = 0;
  std::vector<std::string> feature_names;      // kept columns
  FeatureMask feature_mask;                    // over the raw layout
  std::vector<double> feature_mean;            // train statistics, kept columns
  std::vector<double> feature_std;
  std::vector<int> target_index;               // layout index of each kept target
  std::vector<model::Interval> target_bounds;  // per kept target
  SampleSet train;
  SampleSet val;
  std::uint64_t cache_key = 0;
  bool from_cache = false;
};

/// One simulated robot as seen by the dataset builder.
struct EpisodeInput {
  std::int64_t robot_id = 0;
  const dyn::Chain* chain = nullptr;
  const control::TrajectoryLog* log = nullptr;
  model::RawParams params{};
};

struct BuildOptions {
  std::optional<std::filesystem::path> cache_dir;
  int workers = 1;
};

/// Robot ids of the training split: ids are shuffled with split_seed and the
/// first round(n * train_fraction) go to training.
std::vector<std::int64_t> train_robot_ids(std::vector<std::int64_t> ids, const DatasetConfig& cfg);

/// Splits by robot, samples windows, enriches, prunes constant columns on the
/// training split, standardizes with training statistics and normalizes
/// targets. Targets with a degenerate bound are dropped. Throws
/// armid::Error(Contract) for a non-Ok log, Error(Config) for an empty split.
Dataset build_dataset(std::span<const EpisodeInput> episodes, const Bounds& bounds, const DatasetConfig& cfg,
                      const BuildOptions& options = {});

/// Cache key over the config, parameter layout version, feature layout and
/// the episode contents.
std::uint64_t dataset_key(std::span<const EpisodeInput> episodes, const Bounds& bounds, const DatasetConfig& cfg);

void write_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace armid::data
