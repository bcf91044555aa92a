#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "armid/control/simulate.hpp"
#include "armid/control/waypoints.hpp"
#include "armid/core/error.hpp"
#include "armid/data/dataset.hpp"
#include "armid/data/sampler.hpp"
#include "armid/dyn/dynamics.hpp"
#include "armid/model/generator.hpp"
#include "oracles.hpp"

namespace armid::data {
namespace {

control::TrajectoryLog synthetic_log(std::size_t frames, int dof = 6) {
  control::TrajectoryLog log;
  log.dof = dof;
  dyn::VectorJ q(dof), qd(dof), tau(dof);
  for (std::size_t f = 0; f < frames; ++f) {
    for (int j = 0; j < dof; ++j) {
      q[j] = std::sin(0.001 * f * (j + 1));
      qd[j] = std::cos(0.002 * f + j);
      tau[j] = 0.1 * j + 1e-3 * f;
    }
    log.append(f * 1e-3, q, qd, tau);
  }
  return log;
}

DatasetConfig make_cfg(int seq, int stride, int ssr) {
  DatasetConfig c;
  c.seq_len = seq;
  c.stride = stride;
  c.ssr = ssr;
  return c;
}

TEST(EffectiveTime, Examples) {
  EXPECT_EQ(effective_time(64, 64), 4.096);
  EXPECT_EQ(effective_time(16, 256), 4.096);
  EXPECT_EQ(effective_time(1, 1000), 1.0);
  EXPECT_EQ(effective_time(16, 32), 0.512);
  EXPECT_EQ(effective_time(128, 64), 8.192);
  EXPECT_THROW(effective_time(0, 4), Error);
}

TEST(Offsets, CountsAndUtilization) {
  EXPECT_EQ(sampling_offsets(64, 16), (std::vector<int>{0, 16, 32, 48}));
  EXPECT_EQ(utilization(64, 16), 0.0625);
  EXPECT_EQ(sampling_offsets(64, 64), std::vector<int>{0});
  EXPECT_EQ(sampling_offsets(32, 128), std::vector<int>{0});
}

TEST(Config, Validation) {
  EXPECT_NO_THROW(make_cfg(16, 64, 16).validate());
  EXPECT_NO_THROW(make_cfg(32, 128, 128).validate());
  EXPECT_THROW(make_cfg(1, 64, 16).validate(), Error);
  EXPECT_THROW(make_cfg(16, 64, 24).validate(), Error);
  EXPECT_THROW(make_cfg(16, 0, 1).validate(), Error);
}

TEST(OffsetSample, SingleOffsetEqualsDecimation) {
  const auto log = synthetic_log(1000);
  const auto wins = offset_sample(log, make_cfg(8, 10, 10));
  ASSERT_EQ(wins.size(), 12u);  // 100 kept frames -> 12 full windows of 8
  std::size_t expect = 0;
  for (const auto& w : wins) {
    EXPECT_EQ(w.offset, 0);
    for (std::size_t f : w.frames) {
      EXPECT_EQ(f, expect);
      expect += 10;
    }
  }
}

TEST(OffsetSample, ShortLogAndStatus) {
  EXPECT_TRUE(offset_sample(synthetic_log(50), make_cfg(16, 4, 4)).empty());
  EXPECT_TRUE(offset_sample(synthetic_log(0), make_cfg(16, 4, 4)).empty());
  auto bad = synthetic_log(500);
  bad.status = control::EpisodeStatus::Diverged;
  EXPECT_THROW(offset_sample(bad, make_cfg(4, 4, 4)), Error);
}

// Independent counting: bucket every frame by its residue, keep residues that
// are offsets, and chop each bucket into full windows.
std::size_t count_oracle(std::size_t frames, int seq, int stride, int ssr) {
  std::map<int, std::size_t> bucket;
  const int step = ssr >= stride ? stride : ssr;
  for (std::size_t t = 0; t < frames; ++t) {
    const int r = static_cast<int>(t % static_cast<std::size_t>(stride));
    if (r % step == 0 && (ssr < stride || r == 0)) ++bucket[r];
  }
  std::size_t total = 0;
  for (const auto& [r, n] : bucket) total += n / static_cast<std::size_t>(seq);
  return total;
}

struct GridRow {
  int seq, stride, ssr;
};
const GridRow kGrid[] = {{16, 32, 8},   {16, 64, 16},  {16, 128, 32}, {16, 256, 32}, {32, 32, 8},   {32, 64, 16},
                         {32, 128, 128}, {64, 32, 8},  {64, 32, 16},  {64, 64, 16},  {64, 64, 32}, {64, 64, 64},
                         {128, 16, 8},  {128, 32, 8},  {128, 32, 16}, {128, 64, 16}};

TEST(OffsetSample, CountingOracle) {
  for (std::size_t frames : {0u, 1u, 511u, 4096u, 9001u, 20000u}) {
    for (const auto& g : kGrid) {
      const auto cfg = make_cfg(g.seq, g.stride, g.ssr);
      const auto log = synthetic_log(frames, 1);
      const auto wins = offset_sample(log, cfg);
      EXPECT_EQ(wins.size(), count_oracle(frames, g.seq, g.stride, g.ssr)) << frames << " " << g.seq;
      EXPECT_EQ(wins.size(), count_windows(frames, cfg));
    }
  }
}

TEST(OffsetSample, UtilizationIdentityAndDisjointOffsets) {
  for (const auto& g : kGrid) {
    const auto cfg = make_cfg(g.seq, g.stride, g.ssr);
    const std::size_t frames = static_cast<std::size_t>(g.seq) * g.stride * 3;
    const auto wins = offset_sample(synthetic_log(frames, 1), cfg);
    std::map<std::size_t, int> owner;
    for (const auto& w : wins) {
      ASSERT_EQ(w.frames.size(), static_cast<std::size_t>(g.seq));
      for (std::size_t k = 0; k < w.frames.size(); ++k) {
        ASSERT_LT(w.frames[k], frames);
        if (k) EXPECT_EQ(w.frames[k] - w.frames[k - 1], static_cast<std::size_t>(g.stride));
        auto [it, fresh] = owner.emplace(w.frames[k], w.offset);
        EXPECT_TRUE(fresh) << "frame " << w.frames[k] << " reused";
      }
    }
    const double used = static_cast<double>(owner.size()) / static_cast<double>(frames);
    EXPECT_DOUBLE_EQ(used, utilization(g.stride, g.ssr));
    if (g.ssr <= g.stride) EXPECT_DOUBLE_EQ(used, 1.0 / g.ssr);
  }
}

TEST(Resample, NativeRateAndHalfRate) {
  const auto log = synthetic_log(101);
  const auto same = resample_linear(log, 1000.0);
  ASSERT_EQ(same.frame_count(), 101u);
  for (std::size_t i = 0; i < log.q.size(); ++i) EXPECT_NEAR(same.q[i], log.q[i], 1e-12);
  const auto half = resample_linear(log, 500.0);
  ASSERT_EQ(half.frame_count(), 51u);
  for (std::size_t f = 0; f < 51; ++f)
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(half.q_at(f)[j], log.q_at(2 * f)[j], 1e-12);
  const auto odd = resample_linear(log, 640.0);  // 1.5625 ms grid
  const double mid = 0.5 * (log.tau_at(1)[3] + log.tau_at(2)[3]);
  EXPECT_NEAR(odd.tau_at(1)[3], 0.4375 * log.tau_at(1)[3] + 0.5625 * log.tau_at(2)[3], 1e-12);
  EXPECT_NE(odd.tau_at(1)[3], mid);
}

TEST(Features, LayoutAndJacobianOracle) {
  DatasetConfig cfg;
  const auto names = feature_layout(cfg, 6);
  ASSERT_EQ(names.size(), 18u + 21u);
  for (const auto& n : names) EXPECT_EQ(n.find(".L0"), std::string::npos);
  cfg.jacobian_rows = JacobianRows::Full;
  EXPECT_EQ(feature_layout(cfg, 6).size(), 18u + 126u);
  cfg.include_torque = false;
  cfg.include_jacobian = false;
  EXPECT_EQ(feature_layout(cfg, 6).size(), 12u);

  const auto chain = dyn::make_chain(testing::random_robot(4));
  const auto log = synthetic_log(300);
  const std::vector<std::size_t> frames{0, 100, 299};
  DatasetConfig z;
  const auto rows = enrich_features(chain, log, frames, z);
  ASSERT_EQ(rows.size(), 3u * 39u);
  for (std::size_t r = 0; r < frames.size(); ++r) {
    dyn::VectorJ q(6);
    for (int j = 0; j < 6; ++j) q[j] = log.q_at(frames[r])[j];
    std::size_t col = 18;
    for (int l = 1; l <= 6; ++l) {
      const auto jac = dyn::jacobian(chain, q, l);
      for (int j = 0; j < l; ++j) EXPECT_NEAR(rows[r * 39 + col++], jac(2, j), 1e-12);
    }
    EXPECT_EQ(rows[r * 39 + 12 + 2], log.tau_at(frames[r])[2]);
  }
}

TEST(Features, PureFunctionOfQ) {
  const auto chain = dyn::make_chain(testing::random_robot(5));
  auto log = synthetic_log(3);
  for (int j = 0; j < 6; ++j) log.q[2 * 6 + j] = log.q[j];
  DatasetConfig cfg;
  const std::vector<std::size_t> frames{0, 2};
  const auto rows = enrich_features(chain, log, frames, cfg);
  for (int c = 18; c < 39; ++c) EXPECT_EQ(rows[c], rows[39 + c]);
}

TEST(Prune, Rules) {
  // Column 0 constant, column 1 variance 1, column 2 tiny noise below threshold.
  std::vector<double> rows;
  for (int r = 0; r < 10; ++r) {
    rows.push_back(3.0);
    rows.push_back(r % 2 == 0 ? -1.0 : 1.0);
    rows.push_back(1.0 + (r % 2) * 1e-12);
  }
  const std::vector<std::string> names{"a", "b", "c"};
  const auto mask = constant_feature_mask(rows, 3, names);
  EXPECT_EQ(mask.keep, (std::vector<bool>{false, true, false}));
  ASSERT_EQ(mask.notes.size(), 2u);
  EXPECT_EQ(mask.notes[0].rfind("a:", 0), 0u);
  const auto kept = apply_mask(rows, 3, mask);
  EXPECT_EQ(kept.size(), 10u);
  const auto again = constant_feature_mask(kept, 1);
  EXPECT_EQ(again.keep, std::vector<bool>{true});
  EXPECT_EQ(apply_mask(kept, 1, again), kept);

  const std::vector<double> flat(12, 2.0);
  try {
    constant_feature_mask(flat, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateDataset);
  }
}

TEST(Targets, NormalizeRoundTrip) {
  const auto tmpl = model::KinematicTemplate::anthropomorphic();
  const model::VariationRanges ranges;
  const auto bounds = model::param_bounds(ranges, tmpl);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto raw = model::extract_params(testing::random_robot(seed));
    const auto pv = normalize_targets(raw, bounds);
    const auto back = denormalize_targets(pv, bounds);
    for (int k = 0; k < model::kParamCount; ++k) {
      EXPECT_GE(pv.values[k], 0.0);
      EXPECT_LE(pv.values[k], 1.0);
      EXPECT_NEAR(back[k], raw[k], 1e-12 * std::max(1.0, std::abs(raw[k])));
    }
  }
}

TEST(Targets, EndpointsDegenerateAndOutOfRange) {
  Bounds b;
  for (auto& x : b) x = {1.0, 3.0};
  b[5] = {2.0, 2.0};
  model::RawParams raw;
  raw.fill(1.0);
  raw[1] = 3.0;
  raw[5] = 2.0;
  const auto pv = normalize_targets(raw, b);
  EXPECT_EQ(pv.values[0], 0.0);
  EXPECT_EQ(pv.values[1], 1.0);
  EXPECT_EQ(pv.values[5], 0.0);
  EXPECT_TRUE(pv.constant[5]);
  EXPECT_FALSE(pv.constant[0]);
  raw[7] = 3.5;
  try {
    normalize_targets(raw, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfRange);
  }
}

class BuildFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto tmpl = model::KinematicTemplate::anthropomorphic();
    bounds_ = model::param_bounds(model::VariationRanges{}, tmpl);
    for (int id = 0; id < 10; ++id) {
      const auto robot = model::generate_robot(500 + id, tmpl, {}, id);
      chains_.push_back(dyn::make_chain(robot));
      params_.push_back(model::extract_params(robot));
    }
    for (int id = 0; id < 10; ++id) {
      auto wps = control::sample_waypoints(chains_[id], 1, id, dyn::VectorJ::Zero(6));
      auto log = control::simulate_trajectory(chains_[id], wps, control::PidGains::defaults(6), {}, id);
      log.status = control::EpisodeStatus::Ok;  // keep every robot for the split checks
      logs_.push_back(std::move(log));
    }
    for (int id = 0; id < 10; ++id) episodes_.push_back({id, &chains_[id], &logs_[id], params_[id]});
  }

  Bounds bounds_;
  std::vector<dyn::Chain> chains_;
  std::vector<model::RawParams> params_;
  std::vector<control::TrajectoryLog> logs_;
  std::vector<EpisodeInput> episodes_;
};

TEST_F(BuildFixture, SplitCountsAndStandardization) {
  const auto cfg = make_cfg(8, 8, 4);
  const auto ds = build_dataset(episodes_, bounds_, cfg);
  std::set<std::int64_t> train(ds.train.robot_ids.begin(), ds.train.robot_ids.end());
  std::set<std::int64_t> val(ds.val.robot_ids.begin(), ds.val.robot_ids.end());
  EXPECT_EQ(train.size(), 9u);
  EXPECT_EQ(val.size(), 1u);
  for (auto id : val) EXPECT_FALSE(train.count(id));

  std::size_t expected = 0;
  for (const auto& log : logs_) expected += count_windows(log.frame_count(), cfg);
  EXPECT_EQ(ds.train.count + ds.val.count, expected);

  EXPECT_EQ(ds.feature_count, static_cast<int>(ds.feature_names.size()));
  EXPECT_LT(ds.feature_count, 39);  // jz.L1.J0 is identically zero
  EXPECT_EQ(std::count(ds.feature_names.begin(), ds.feature_names.end(), "jz.L1.J0"), 0);
  EXPECT_EQ(ds.target_count, model::kParamCount);
  EXPECT_EQ(ds.val.features.size(), ds.val.count * 8 * ds.feature_count);

  const std::size_t f = ds.feature_count;
  const std::size_t rows = ds.train.features.size() / f;
  for (std::size_t c = 0; c < f; ++c) {
    double m = 0.0, s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) m += ds.train.features[r * f + c];
    m /= rows;
    for (std::size_t r = 0; r < rows; ++r) s += std::pow(ds.train.features[r * f + c] - m, 2);
    EXPECT_NEAR(m, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(s / (rows - 1)), 1.0, 1e-9);
  }
  for (double t : ds.train.targets) {
    EXPECT_GE(t, 0.0);
    EXPECT_LE(t, 1.0);
  }
}

TEST_F(BuildFixture, CacheHitIsBitIdentical) {
  const auto dir = std::filesystem::temp_directory_path() / "armid_dataset_cache_test";
  std::filesystem::remove_all(dir);
  BuildOptions opts;
  opts.cache_dir = dir;
  opts.workers = 2;
  const auto cfg = make_cfg(8, 16, 8);
  const auto first = build_dataset(episodes_, bounds_, cfg, opts);
  EXPECT_FALSE(first.from_cache);
  const auto second = build_dataset(episodes_, bounds_, cfg, opts);
  EXPECT_TRUE(second.from_cache);
  EXPECT_EQ(second.cache_key, first.cache_key);
  EXPECT_EQ(second.train.features, first.train.features);
  EXPECT_EQ(second.val.targets, first.val.targets);
  EXPECT_EQ(second.feature_names, first.feature_names);
  EXPECT_EQ(second.feature_std, first.feature_std);
  EXPECT_EQ(second.feature_mask.keep, first.feature_mask.keep);

  auto other = cfg;
  other.ssr = 16;
  EXPECT_NE(dataset_key(episodes_, bounds_, other), first.cache_key);
  std::filesystem::remove_all(dir);
}

TEST_F(BuildFixture, ContractErrors) {
  logs_[3].status = control::EpisodeStatus::Timeout;
  try {
    build_dataset(episodes_, bounds_, make_cfg(8, 8, 8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Contract);
  }
  logs_[3].status = control::EpisodeStatus::Ok;
  const std::vector<EpisodeInput> two(episodes_.begin(), episodes_.begin() + 2);
  try {
    build_dataset(two, bounds_, make_cfg(8, 8, 8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
}

TEST(Split, ByRobotDeterministic) {
  std::vector<std::int64_t> ids;
  for (int i = 0; i < 64; ++i) ids.push_back(i * 3);
  DatasetConfig cfg;
  const auto a = train_robot_ids(ids, cfg);
  EXPECT_EQ(a.size(), 58u);  // round(57.6)
  EXPECT_EQ(a, train_robot_ids(ids, cfg));
  cfg.split_seed = 9;
  EXPECT_NE(a, train_robot_ids(ids, cfg));
}

}  // namespace
}  // namespace armid::data
