#include "armid/data/targets.hpp"

#include <algorithm>
#include <cmath>

#include "armid/core/error.hpp"

namespace armid::data {

ParamVector normalize_targets(const model::RawParams& raw, const Bounds& bounds) {
  ParamVector out;
  const auto& layout = model::param_layout();
  for (int k = 0; k < model::kParamCount; ++k) {
    const auto& b = bounds[k];
    const double v = raw[k];
    // Bounds come from range corners; allow rounding-level excursions.
    const double slack = 1e-12 * std::max({std::abs(b.min), std::abs(b.max), 1e-300});
    if (!std::isfinite(v) || v < b.min - slack || v > b.max + slack)
      throw Error(ErrorKind::OutOfRange, layout[k].name + " = " + std::to_string(v) + " is outside [" +
                                             std::to_string(b.min) + ", " + std::to_string(b.max) + "]");
    if (b.max == b.min) {
      out.values[k] = 0.0;
      out.constant[k] = true;
    } else {
      out.values[k] = std::clamp((v - b.min) / (b.max - b.min), 0.0, 1.0);
    }
  }
  return out;
}

model::RawParams denormalize_targets(const ParamVector& normalized, const Bounds& bounds) {
  model::RawParams out{};
  for (int k = 0; k < model::kParamCount; ++k) {
    const auto& b = bounds[k];
    out[k] = b.max == b.min ? b.min : b.min + normalized.values[k] * (b.max - b.min);
  }
  return out;
}

}  // namespace armid::data
