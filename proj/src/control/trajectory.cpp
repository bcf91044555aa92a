#include "armid/control/trajectory.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "armid/core/error.hpp"

namespace armid::control {

static_assert(std::endian::native == std::endian::little, "trajectory files are little-endian");

namespace {

constexpr char kMagic[8] = {'A', 'R', 'M', 'T', 'R', 'A', 'J', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorKind::Io, "truncated trajectory file");
  return v;
}

}  // namespace

const char* to_string(EpisodeStatus status) noexcept {
  switch (status) {
    case EpisodeStatus::Ok: return "ok";
    case EpisodeStatus::NaNDetected: return "nan";
    case EpisodeStatus::Diverged: return "diverged";
    case EpisodeStatus::Timeout: return "timeout";
  }
  return "unknown";
}

void TrajectoryLog::append(double t, const VectorJ& q_now, const VectorJ& qd_now, const VectorJ& tau_now) {
  time.push_back(t);
  q.insert(q.end(), q_now.data(), q_now.data() + dof);
  qd.insert(qd.end(), qd_now.data(), qd_now.data() + dof);
  tau.insert(tau.end(), tau_now.data(), tau_now.data() + dof);
}

void write_trajectory(const std::filesystem::path& path, const TrajectoryLog& log) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    put(out, kVersion);
    put(out, static_cast<std::uint32_t>(log.dof));
    put(out, log.robot_id);
    put(out, log.dt);
    put(out, static_cast<std::uint64_t>(log.frame_count()));
    put(out, static_cast<std::uint8_t>(log.status));
    put(out, static_cast<std::uint32_t>(log.waypoints.size()));
    for (const auto& w : log.waypoints) {
      for (int j = 0; j < log.dof; ++j) put(out, w.q_target[j]);
      put(out, w.hold_tolerance);
      put(out, w.settle_time);
      put(out, w.max_time);
    }
    put(out, static_cast<std::uint32_t>(log.outcomes.size()));
    for (const auto& o : log.outcomes) {
      put(out, static_cast<std::uint8_t>(o.settled));
      put(out, o.first_frame);
      put(out, o.end_frame);
    }
    const std::size_t d = static_cast<std::size_t>(log.dof);
    for (std::size_t f = 0; f < log.frame_count(); ++f) {
      put(out, log.time[f]);
      out.write(reinterpret_cast<const char*>(log.q.data() + f * d), static_cast<std::streamsize>(d * 8));
      out.write(reinterpret_cast<const char*>(log.qd.data() + f * d), static_cast<std::streamsize>(d * 8));
      out.write(reinterpret_cast<const char*>(log.tau.data() + f * d), static_cast<std::streamsize>(d * 8));
    }
    if (!out) throw Error(ErrorKind::Io, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

TrajectoryLog read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error(ErrorKind::Io, "not a trajectory file: " + path.string());
  if (get<std::uint32_t>(in) != kVersion) throw Error(ErrorKind::Io, "unsupported trajectory version");

  TrajectoryLog log;
  log.dof = static_cast<int>(get<std::uint32_t>(in));
  if (log.dof < 1 || log.dof > dyn::kMaxDof) throw Error(ErrorKind::Io, "bad dof in trajectory file");
  log.robot_id = get<std::int64_t>(in);
  log.dt = get<double>(in);
  const auto frames = get<std::uint64_t>(in);
  const auto status = get<std::uint8_t>(in);
  if (status > 3) throw Error(ErrorKind::Io, "bad status in trajectory file");
  log.status = static_cast<EpisodeStatus>(status);

  const auto n_wp = get<std::uint32_t>(in);
  for (std::uint32_t k = 0; k < n_wp; ++k) {
    Waypoint w;
    w.q_target.resize(log.dof);
    for (int j = 0; j < log.dof; ++j) w.q_target[j] = get<double>(in);
    w.hold_tolerance = get<double>(in);
    w.settle_time = get<double>(in);
    w.max_time = get<double>(in);
    log.waypoints.push_back(w);
  }
  const auto n_out = get<std::uint32_t>(in);
  for (std::uint32_t k = 0; k < n_out; ++k) {
    WaypointOutcome o;
    o.settled = get<std::uint8_t>(in) != 0;
    o.first_frame = get<std::uint64_t>(in);
    o.end_frame = get<std::uint64_t>(in);
    log.outcomes.push_back(o);
  }

  const std::size_t d = static_cast<std::size_t>(log.dof);
  const auto here = in.tellg();
  in.seekg(0, std::ios::end);
  const auto remaining = static_cast<std::uint64_t>(in.tellg() - here);
  in.seekg(here);
  if (remaining != frames * (1 + 3 * d) * 8) throw Error(ErrorKind::Io, "trajectory frame block size mismatch");

  log.time.resize(frames);
  log.q.resize(frames * d);
  log.qd.resize(frames * d);
  log.tau.resize(frames * d);
  for (std::size_t f = 0; f < frames; ++f) {
    log.time[f] = get<double>(in);
    in.read(reinterpret_cast<char*>(log.q.data() + f * d), static_cast<std::streamsize>(d * 8));
    in.read(reinterpret_cast<char*>(log.qd.data() + f * d), static_cast<std::streamsize>(d * 8));
    in.read(reinterpret_cast<char*>(log.tau.data() + f * d), static_cast<std::streamsize>(d * 8));
  }
  if (!in) throw Error(ErrorKind::Io, "truncated trajectory file");
  return log;
}

std::string summary_line(const TrajectoryLog& log) {
  std::size_t settled = 0;
  for (const auto& o : log.outcomes) settled += o.settled ? 1 : 0;
  double peak_tau = 0.0;
  for (double v : log.tau) peak_tau = std::fmax(peak_tau, std::abs(v));
  std::ostringstream s;
  s << "robot " << log.robot_id << ": status=" << to_string(log.status) << " frames=" << log.frame_count()
    << " duration=" << static_cast<double>(log.frame_count()) * log.dt << "s settled=" << settled << "/"
    << log.waypoints.size() << " peak_tau=" << peak_tau;
  return s.str();
}

}  // namespace armid::control
