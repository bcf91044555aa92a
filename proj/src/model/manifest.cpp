#include "armid/model/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "armid/core/error.hpp"

namespace armid::model {

using nlohmann::json;

ManifestRecord make_record(const RobotModel& robot) {
  return {robot.id, robot.generation_seed, extract_params(robot)};
}

std::string manifest_line(const ManifestRecord& record) {
  json j;
  j["id"] = record.id;
  j["seed"] = record.seed;
  j["layout"] = kParamLayoutVersion;
  j["params"] = record.params;
  return j.dump();
}

ManifestRecord parse_manifest_line(const std::string& line) {
  try {
    const json j = json::parse(line);
    if (j.at("layout").get<int>() != kParamLayoutVersion) {
      throw Error(ErrorKind::Parse, "manifest: unsupported parameter layout version");
    }
    ManifestRecord r;
    r.id = j.at("id").get<std::int64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    const auto& params = j.at("params");
    if (!params.is_array() || params.size() != kParamCount) {
      throw Error(ErrorKind::Parse, "manifest: params must hold " + std::to_string(kParamCount) + " values");
    }
    for (int k = 0; k < kParamCount; ++k) r.params[k] = params[k].get<double>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp);
    for (const auto& r : records) out << manifest_line(r) << '\n';
    if (!out) throw Error(ErrorKind::Io, "write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::vector<ManifestRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(parse_manifest_line(line));
  }
  return out;
}

}  // namespace armid::model
