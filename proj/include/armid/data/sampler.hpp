#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "armid/control/trajectory.hpp"
#include "armid/data/config.hpp"

namespace armid::data {

/// Seconds of motion covered by one sequence: seq_len * stride / 1000.
double effective_time(int seq_len, int stride);

/// Window start offsets {0, ssr, ..., stride - ssr}; just {0} when ssr >= stride.
std::vector<int> sampling_offsets(int stride, int ssr);

/// Fraction of raw frames touched by the offset sampler: offsets / stride.
double utilization(int stride, int ssr);

struct Window {
  int offset = 0;
  int index = 0;                   // window number within its offset
  std::vector<std::size_t> frames; // raw frame indices, seq_len of them
};

/// For each offset o, packs the decimated frames o, o + stride, ... into
/// consecutive non-overlapping windows of seq_len. Short logs yield an empty
/// list. Throws armid::Error(Contract) when the log status is not Ok.
std::vector<Window> offset_sample(const control::TrajectoryLog& log, const DatasetConfig& cfg);

/// Number of windows offset_sample would emit for a log of `frames` frames.
std::size_t count_windows(std::size_t frames, const DatasetConfig& cfg);

/// Resamples a log onto a uniform grid at `rate_hz` by linear interpolation
/// of q, qd and tau. The result keeps robot id, waypoints and status.
control::TrajectoryLog resample_linear(const control::TrajectoryLog& log, double rate_hz);

}  // namespace armid::data
