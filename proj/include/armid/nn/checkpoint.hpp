#pragma once

#include <filesystem>

#include "armid/nn/encoder.hpp"

namespace armid::nn {

/// Binary checkpoint: magic, version, encoder config, element width, tensor
/// manifest (name, rows, cols) and the raw weights. Written atomically.
template <typename T>
void write_checkpoint(const std::filesystem::path& path, const Encoder<T>& model);

/// Loads a checkpoint of either width into an Encoder<T>. Throws
/// armid::Error(Io) for truncated or foreign files and Error(Config) when the
/// manifest does not match the stored config.
template <typename T>
Encoder<T> read_checkpoint(const std::filesystem::path& path);

}  // namespace armid::nn
