#pragma once

#include <cstdint>

namespace armid::data {

enum class JacobianRows {
  LinearZ,  // dz/dq per link: 21 columns
  Full,     // all six rows per link: 126 columns
};

/// Sequence extraction settings. `stride` is the decimation stride in raw
/// 1 ms ticks (one kept frame per `stride` ticks); `ssr` is the step between
/// window start offsets.
struct DatasetConfig {
  int seq_len = 16;
  int stride = 16;
  int ssr = 16;
  bool include_torque = true;
  bool include_jacobian = true;
  JacobianRows jacobian_rows = JacobianRows::LinearZ;
  double resample_hz = 0.0;      // > 0: linear interpolation onto this grid before sampling
  double train_fraction = 0.9;
  std::uint64_t split_seed = 0;

  /// Throws armid::Error(Config) on invalid settings. ssr >= stride is
  /// accepted and means a single offset (plain decimation).
  void validate() const;
};

}  // namespace armid::data
