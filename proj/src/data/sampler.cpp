#include "armid/data/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "armid/core/error.hpp"

namespace armid::data {

double effective_time(int seq_len, int stride) {
  if (seq_len <= 0 || stride <= 0) throw Error(ErrorKind::Domain, "effective_time needs positive inputs");
  // Integer milliseconds first, so the result is the correctly rounded decimal.
  return static_cast<double>(static_cast<long long>(seq_len) * stride) / 1000.0;
}

std::vector<int> sampling_offsets(int stride, int ssr) {
  if (stride <= 0 || ssr <= 0) throw Error(ErrorKind::Domain, "stride and ssr must be positive");
  std::vector<int> out;
  if (ssr >= stride) {
    out.push_back(0);
    return out;
  }
  for (int o = 0; o < stride; o += ssr) out.push_back(o);
  return out;
}

double utilization(int stride, int ssr) {
  return static_cast<double>(sampling_offsets(stride, ssr).size()) / static_cast<double>(stride);
}

std::size_t count_windows(std::size_t frames, const DatasetConfig& cfg) {
  std::size_t total = 0;
  for (int o : sampling_offsets(cfg.stride, cfg.ssr)) {
    const auto off = static_cast<std::size_t>(o);
    if (off >= frames) continue;
    const std::size_t kept = (frames - 1 - off) / static_cast<std::size_t>(cfg.stride) + 1;
    total += kept / static_cast<std::size_t>(cfg.seq_len);
  }
  return total;
}

std::vector<Window> offset_sample(const control::TrajectoryLog& log, const DatasetConfig& cfg) {
  cfg.validate();
  if (log.status != control::EpisodeStatus::Ok)
    throw Error(ErrorKind::Contract, "offset_sample: log status is not Ok");
  const std::size_t frames = log.frame_count();
  const auto stride = static_cast<std::size_t>(cfg.stride);
  const auto seq = static_cast<std::size_t>(cfg.seq_len);
  std::vector<Window> out;
  for (int o : sampling_offsets(cfg.stride, cfg.ssr)) {
    const auto off = static_cast<std::size_t>(o);
    if (off >= frames) continue;
    const std::size_t kept = (frames - 1 - off) / stride + 1;
    for (std::size_t w = 0; w < kept / seq; ++w) {
      Window win;
      win.offset = o;
      win.index = static_cast<int>(w);
      win.frames.resize(seq);
      for (std::size_t k = 0; k < seq; ++k) win.frames[k] = off + (w * seq + k) * stride;
      out.push_back(std::move(win));
    }
  }
  return out;
}

control::TrajectoryLog resample_linear(const control::TrajectoryLog& log, double rate_hz) {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw Error(ErrorKind::Domain, "resample rate must be positive");
  control::TrajectoryLog out;
  out.robot_id = log.robot_id;
  out.dof = log.dof;
  out.dt = 1.0 / rate_hz;
  out.waypoints = log.waypoints;
  out.status = log.status;
  const std::size_t n = log.frame_count();
  if (n == 0) return out;
  const double t_end = log.time.back();
  const std::size_t d = static_cast<std::size_t>(log.dof);
  dyn::VectorJ q(log.dof), qd(log.dof), tau(log.dof);
  std::size_t seg = 0;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * out.dt;
    if (t > t_end + 1e-12) break;
    while (seg + 1 < n - 1 && log.time[seg + 1] <= t) ++seg;
    const std::size_t a = seg;
    const std::size_t b = std::min(seg + 1, n - 1);
    const double span = log.time[b] - log.time[a];
    const double w = span > 0.0 ? std::clamp((t - log.time[a]) / span, 0.0, 1.0) : 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      q[j] = (1.0 - w) * log.q[a * d + j] + w * log.q[b * d + j];
      qd[j] = (1.0 - w) * log.qd[a * d + j] + w * log.qd[b * d + j];
      tau[j] = (1.0 - w) * log.tau[a * d + j] + w * log.tau[b * d + j];
    }
    out.append(t, q, qd, tau);
  }
  return out;
}

}  // namespace armid::data
