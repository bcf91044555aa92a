#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "armid/model/params.hpp"
#include "armid/model/types.hpp"

namespace armid::model {

/// One line of the generation manifest (JSON Lines).
struct ManifestRecord {
  std::int64_t id = 0;
  std::uint64_t seed = 0;
  RawParams params{};
};

std::string manifest_line(const ManifestRecord& record);
ManifestRecord parse_manifest_line(const std::string& line);

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

ManifestRecord make_record(const RobotModel& robot);

}  // namespace armid::model
