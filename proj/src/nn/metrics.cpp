#include "armid/nn/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "armid/core/error.hpp"

namespace armid::nn {

const TargetMetric* Metrics::find(int layout_index) const {
  for (const auto& t : targets)
    if (t.layout_index == layout_index) return &t;
  return nullptr;
}

std::optional<double> Metrics::group_mean_r2(model::ParamGroup group) const {
  return group_mean_r2(std::span<const model::ParamGroup>(&group, 1));
}

std::optional<double> Metrics::group_mean_r2(std::span<const model::ParamGroup> groups) const {
  const auto& layout = model::param_layout();
  double sum = 0.0;
  int n = 0;
  for (const auto& t : targets) {
    if (!t.r2 || t.layout_index < 0 || t.layout_index >= static_cast<int>(layout.size())) continue;
    if (std::find(groups.begin(), groups.end(), layout[t.layout_index].group) == groups.end()) continue;
    sum += *t.r2;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

Metrics compute_metrics(std::span<const double> pred, std::span<const double> truth, std::size_t count,
                        std::span<const int> target_index) {
  const std::size_t P = target_index.size();
  if (count == 0) throw Error(ErrorKind::Contract, "metrics need at least one sample");
  if (pred.size() != count * P || truth.size() != count * P)
    throw Error(ErrorKind::Contract, "prediction and target shapes differ");

  const auto& layout = model::param_layout();
  Metrics m;
  m.samples = count;
  double r2_sum = 0.0;
  int r2_n = 0;
  double rmse_sum = 0.0;
  for (std::size_t j = 0; j < P; ++j) {
    // Welford for the target spread, plain sum for the residuals.
    double mean = 0.0, m2 = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double t = truth[i * P + j];
      const double delta = t - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (t - mean);
      const double r = pred[i * P + j] - t;
      ss_res += r * r;
    }
    TargetMetric tm;
    tm.layout_index = target_index[j];
    tm.name = tm.layout_index >= 0 && tm.layout_index < static_cast<int>(layout.size())
                  ? layout[tm.layout_index].name
                  : "target" + std::to_string(j);
    tm.rmse = std::sqrt(ss_res / static_cast<double>(count));
    if (m2 > 0.0) {
      tm.r2 = 1.0 - ss_res / m2;
      r2_sum += *tm.r2;
      ++r2_n;
    }
    rmse_sum += tm.rmse;
    m.targets.push_back(std::move(tm));
  }
  if (r2_n > 0) m.mean_r2 = r2_sum / r2_n;
  m.mean_rmse = P > 0 ? rmse_sum / static_cast<double>(P) : 0.0;
  return m;
}

}  // namespace armid::nn
