#pragma once

#include "armid/nn/metrics.hpp"
#include "json.hpp"

namespace armid::pipeline::detail {

inline nlohmann::json metrics_json(const nn::Metrics& m) {
  using nlohmann::json;
  json targets = json::array();
  for (const auto& t : m.targets)
    targets.push_back({{"name", t.name},
                       {"index", t.layout_index},
                       {"r2", t.r2 ? json(*t.r2) : json(nullptr)},
                       {"rmse", t.rmse}});
  return {{"samples", m.samples},
          {"mean_r2", m.mean_r2 ? json(*m.mean_r2) : json(nullptr)},
          {"mean_rmse", m.mean_rmse},
          {"targets", targets}};
}

inline nn::Metrics metrics_from_json(const nlohmann::json& j) {
  nn::Metrics m;
  m.samples = j.at("samples").get<std::size_t>();
  if (!j.at("mean_r2").is_null()) m.mean_r2 = j.at("mean_r2").get<double>();
  m.mean_rmse = j.at("mean_rmse").get<double>();
  for (const auto& t : j.at("targets")) {
    nn::TargetMetric tm;
    tm.name = t.at("name").get<std::string>();
    tm.layout_index = t.at("index").get<int>();
    if (!t.at("r2").is_null()) tm.r2 = t.at("r2").get<double>();
    tm.rmse = t.at("rmse").get<double>();
    m.targets.push_back(std::move(tm));
  }
  return m;
}

}  // namespace armid::pipeline::detail
