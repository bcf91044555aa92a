#pragma once

#include <array>
#include <vector>

#include "armid/model/params.hpp"

namespace armid::data {

using Bounds = std::array<model::Interval, model::kParamCount>;

/// Min-max normalized parameters. Entries with a degenerate bound (min == max)
/// are 0 and flagged constant.
struct ParamVector {
  std::array<double, model::kParamCount> values{};
  std::array<bool, model::kParamCount> constant{};
};

/// Throws armid::Error(OutOfRange) for a value outside its bound.
ParamVector normalize_targets(const model::RawParams& raw, const Bounds& bounds);
model::RawParams denormalize_targets(const ParamVector& normalized, const Bounds& bounds);

}  // namespace armid::data
