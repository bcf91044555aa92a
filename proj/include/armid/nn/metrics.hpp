#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "armid/model/params.hpp"

namespace armid::nn {

struct TargetMetric {
  std::string name;
  int layout_index = -1;      // index into model::param_layout(), -1 if unknown
  std::optional<double> r2;   // empty when the split's targets have zero variance
  double rmse = 0.0;
};

struct Metrics {
  std::size_t samples = 0;
  std::vector<TargetMetric> targets;
  std::optional<double> mean_r2;  // over targets with a defined R²
  double mean_rmse = 0.0;

  /// Entry for a parameter layout index, or nullptr when it was not a target.
  const TargetMetric* find(int layout_index) const;
  /// Mean R² of the defined targets in a parameter group.
  std::optional<double> group_mean_r2(model::ParamGroup group) const;
  std::optional<double> group_mean_r2(std::span<const model::ParamGroup> groups) const;
};

/// R² = 1 - SS_res / SS_tot against the split's own target means, RMSE in the
/// units of the inputs. pred and truth are count x target_index.size().
Metrics compute_metrics(std::span<const double> pred, std::span<const double> truth, std::size_t count,
                        std::span<const int> target_index);

}  // namespace armid::nn
