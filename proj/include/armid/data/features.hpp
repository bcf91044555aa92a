#pragma once

#include <span>
#include <string>
#include <vector>

#include "armid/control/trajectory.hpp"
#include "armid/data/config.hpp"
#include "armid/dyn/chain.hpp"

namespace armid::data {

/// Raw per-timestep column names: q0..q5, qd0..qd5, [tau0..tau5], then the
/// Jacobian block. Jacobian columns are named "<row>.L<l>.J<j>" for link
/// frames l = 1..6 and joints j < l (row "jz", or "vx".."wz" in Full mode).
std::vector<std::string> feature_layout(const DatasetConfig& cfg, int dof);

/// Jacobian block for one configuration, ordered as in feature_layout.
std::vector<double> jacobian_features(const dyn::Chain& chain, const dyn::VectorJ& q, JacobianRows rows);

/// seq rows x raw columns, row-major, for the given frames of a log.
std::vector<double> enrich_features(const dyn::Chain& chain, const control::TrajectoryLog& log,
                                    std::span<const std::size_t> frames, const DatasetConfig& cfg);

struct FeatureMask {
  std::vector<bool> keep;
  std::vector<std::string> notes;  // one per dropped column
  int kept() const;
};

/// Marks columns whose sample standard deviation over `rows` is below 1e-10.
/// Throws armid::Error(DegenerateDataset) when every column is constant or
/// there are no rows.
FeatureMask constant_feature_mask(std::span<const double> rows, int cols,
                                  std::span<const std::string> names = {});

/// Copies kept columns; the result has mask.kept() columns.
std::vector<double> apply_mask(std::span<const double> rows, int cols, const FeatureMask& mask);

}  // namespace armid::data
