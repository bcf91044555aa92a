#include "armid/data/features.hpp"

#include <cmath>

#include "armid/core/error.hpp"
#include "armid/dyn/dynamics.hpp"

namespace armid::data {

namespace {

constexpr double kConstantStd = 1e-10;
const char* const kRowNames[6] = {"vx", "vy", "vz", "wx", "wy", "wz"};

}  // namespace

std::vector<std::string> feature_layout(const DatasetConfig& cfg, int dof) {
  std::vector<std::string> names;
  for (int j = 0; j < dof; ++j) names.push_back("q" + std::to_string(j));
  for (int j = 0; j < dof; ++j) names.push_back("qd" + std::to_string(j));
  if (cfg.include_torque)
    for (int j = 0; j < dof; ++j) names.push_back("tau" + std::to_string(j));
  if (cfg.include_jacobian) {
    for (int l = 1; l <= dof; ++l) {
      if (cfg.jacobian_rows == JacobianRows::LinearZ) {
        for (int j = 0; j < l; ++j) names.push_back("jz.L" + std::to_string(l) + ".J" + std::to_string(j));
      } else {
        for (int r = 0; r < 6; ++r)
          for (int j = 0; j < l; ++j)
            names.push_back(std::string(kRowNames[r]) + ".L" + std::to_string(l) + ".J" + std::to_string(j));
      }
    }
  }
  return names;
}

std::vector<double> jacobian_features(const dyn::Chain& chain, const dyn::VectorJ& q, JacobianRows rows) {
  std::vector<double> out;
  const int n = chain.dof();
  out.reserve(rows == JacobianRows::LinearZ ? n * (n + 1) / 2 : 3 * n * (n + 1));
  for (int l = 1; l <= n; ++l) {
    const dyn::Jacobian jac = dyn::jacobian(chain, q, l);
    if (rows == JacobianRows::LinearZ) {
      for (int j = 0; j < l; ++j) out.push_back(jac(2, j));
    } else {
      for (int r = 0; r < 6; ++r)
        for (int j = 0; j < l; ++j) out.push_back(jac(r, j));
    }
  }
  return out;
}

std::vector<double> enrich_features(const dyn::Chain& chain, const control::TrajectoryLog& log,
                                    std::span<const std::size_t> frames, const DatasetConfig& cfg) {
  const int dof = log.dof;
  const std::size_t cols = feature_layout(cfg, dof).size();
  std::vector<double> out;
  out.reserve(frames.size() * cols);
  dyn::VectorJ q(dof);
  for (std::size_t f : frames) {
    if (f >= log.frame_count()) throw Error(ErrorKind::Range, "frame index beyond log");
    const auto qs = log.q_at(f);
    const auto qds = log.qd_at(f);
    out.insert(out.end(), qs.begin(), qs.end());
    out.insert(out.end(), qds.begin(), qds.end());
    if (cfg.include_torque) {
      const auto taus = log.tau_at(f);
      out.insert(out.end(), taus.begin(), taus.end());
    }
    if (cfg.include_jacobian) {
      for (int j = 0; j < dof; ++j) q[j] = qs[j];
      const auto jf = jacobian_features(chain, q, cfg.jacobian_rows);
      out.insert(out.end(), jf.begin(), jf.end());
    }
  }
  return out;
}

int FeatureMask::kept() const {
  int n = 0;
  for (bool k : keep) n += k ? 1 : 0;
  return n;
}

FeatureMask constant_feature_mask(std::span<const double> rows, int cols, std::span<const std::string> names) {
  if (cols <= 0 || rows.empty() || rows.size() % static_cast<std::size_t>(cols) != 0)
    throw Error(ErrorKind::DegenerateDataset, "no feature rows to prune");
  const std::size_t n = rows.size() / static_cast<std::size_t>(cols);
  FeatureMask mask;
  mask.keep.assign(static_cast<std::size_t>(cols), false);
  for (int c = 0; c < cols; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += rows[r * cols + c];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = rows[r * cols + c] - mean;
      ss += d * d;
    }
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    if (sd >= kConstantStd) {
      mask.keep[c] = true;
    } else {
      const std::string name = static_cast<std::size_t>(c) < names.size() ? names[c] : "column " + std::to_string(c);
      mask.notes.push_back(name + ": constant on the training split");
    }
  }
  if (mask.kept() == 0) throw Error(ErrorKind::DegenerateDataset, "every feature column is constant");
  return mask;
}

std::vector<double> apply_mask(std::span<const double> rows, int cols, const FeatureMask& mask) {
  if (mask.keep.size() != static_cast<std::size_t>(cols))
    throw Error(ErrorKind::Contract, "feature mask width does not match the rows");
  const std::size_t n = rows.size() / static_cast<std::size_t>(cols);
  std::vector<double> out;
  out.reserve(n * static_cast<std::size_t>(mask.kept()));
  for (std::size_t r = 0; r < n; ++r)
    for (int c = 0; c < cols; ++c)
      if (mask.keep[c]) out.push_back(rows[r * cols + c]);
  return out;
}

}  // namespace armid::data
