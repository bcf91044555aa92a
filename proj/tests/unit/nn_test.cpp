#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "armid/core/error.hpp"
#include "armid/nn/checkpoint.hpp"
#include "armid/nn/encoder.hpp"
#include "armid/nn/metrics.hpp"
#include "armid/nn/train.hpp"
#include "oracles.hpp"

namespace armid::nn {
namespace {

EncoderConfig tiny_config() {
  EncoderConfig c;
  c.d_model = 8;
  c.n_layers = 1;
  c.n_heads = 2;
  c.d_ff = 16;
  c.seq_len = 4;
  c.input_dim = 5;
  c.output_dim = 3;
  return c;
}

template <typename T>
std::vector<T> random_values(std::uint64_t seed, std::size_t n, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(u(gen));
  return v;
}

// Synthetic dataset whose targets are smooth functions of the window.
data::Dataset toy_dataset(std::size_t n_train, std::size_t n_val, int seq, int features, int targets,
                          std::uint64_t seed) {
  data::Dataset ds;
  ds.seq_len = seq;
  ds.feature_count = features;
  ds.target_count = targets;
  for (int f = 0; f < features; ++f) ds.feature_names.push_back("q" + std::to_string(f % 6));
  ds.target_index.resize(targets);
  std::iota(ds.target_index.begin(), ds.target_index.end(), 0);
  auto fill = [&](data::SampleSet& s, std::size_t n, std::uint64_t sd) {
    s.count = n;
    s.features = random_values<double>(sd, n * seq * features);
    s.targets.resize(n * targets);
    for (std::size_t i = 0; i < n; ++i)
      for (int t = 0; t < targets; ++t) {
        double acc = 0;
        for (int k = 0; k < seq; ++k) acc += s.features[(i * seq + k) * features + (t % features)];
        s.targets[i * targets + t] = 0.5 + 0.5 * std::tanh(acc / seq);
      }
  };
  fill(ds.train, n_train, seed);
  fill(ds.val, n_val, seed + 1);
  return ds;
}

TEST(PositionalEncoding, ClosedFormEntries) {
  const auto pe = positional_encoding(10, 8);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(pe[2 * i], 0.0);
    EXPECT_EQ(pe[2 * i + 1], 1.0);
  }
  for (int pos = 0; pos < 10; ++pos) EXPECT_DOUBLE_EQ(pe[pos * 8], std::sin(pos));
  for (double v : pe) EXPECT_LE(std::abs(v), 1.0);
  EXPECT_DOUBLE_EQ(pe[3 * 8 + 3], std::cos(3 / std::pow(10000.0, 2.0 / 8)));
  EXPECT_THROW(positional_encoding(0, 8), Error);
}

TEST(EncoderConfig, Validation) {
  auto c = tiny_config();
  c.n_heads = 3;
  EXPECT_THROW(c.validate(), Error);
  c = tiny_config();
  c.d_ff = 0;
  EXPECT_THROW(c.validate(), Error);
  c = tiny_config();
  c.grouped_input = true;
  c.feature_groups = {0, 1};
  EXPECT_THROW(c.validate(), Error);
}

TEST(Encoder, AttentionRowsAreDistributions) {
  auto c = tiny_config();
  c.n_layers = 2;
  Encoder<double> enc(c, 3);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = random_values<double>(100 + s, c.seq_len * c.input_dim, 3.0);
    const auto maps = enc.attention_maps(x.data());
    ASSERT_EQ(maps.size(), static_cast<std::size_t>(c.n_layers * c.n_heads * c.seq_len * c.seq_len));
    for (std::size_t r = 0; r < maps.size(); r += c.seq_len) {
      double sum = 0;
      for (int j = 0; j < c.seq_len; ++j) {
        EXPECT_GE(maps[r + j], 0.0);
        sum += maps[r + j];
      }
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
  }
}

TEST(Encoder, PermutationInvariantWithoutPositionalEncoding) {
  auto c = tiny_config();
  c.seq_len = 6;
  c.positional_encoding = false;
  Encoder<double> enc(c, 5);
  const auto x = random_values<double>(9, c.seq_len * c.input_dim);
  std::vector<int> perm = {3, 0, 5, 1, 4, 2};
  std::vector<double> xp(x.size());
  for (int s = 0; s < c.seq_len; ++s)
    std::copy_n(x.begin() + perm[s] * c.input_dim, c.input_dim, xp.begin() + s * c.input_dim);
  std::vector<double> a(c.output_dim), b(c.output_dim);
  enc.predict(x.data(), a.data());
  enc.predict(xp.data(), b.data());
  for (int j = 0; j < c.output_dim; ++j) EXPECT_NEAR(a[j], b[j], 1e-6);
}

TEST(Encoder, PositionalEncodingBreaksPermutationSymmetry) {
  auto c = tiny_config();
  Encoder<double> enc(c, 5);
  auto x = random_values<double>(9, c.seq_len * c.input_dim);
  std::vector<double> xr(x.size());
  for (int s = 0; s < c.seq_len; ++s)
    std::copy_n(x.begin() + (c.seq_len - 1 - s) * c.input_dim, c.input_dim, xr.begin() + s * c.input_dim);
  std::vector<double> a(c.output_dim), b(c.output_dim);
  enc.predict(x.data(), a.data());
  enc.predict(xr.data(), b.data());
  double diff = 0;
  for (int j = 0; j < c.output_dim; ++j) diff += std::abs(a[j] - b[j]);
  EXPECT_GT(diff, 1e-9);
}

TEST(Encoder, BatchPredictionIsPerSample) {
  const auto c = tiny_config();
  Encoder<float> enc(c, 1);
  const std::size_t in = c.seq_len * c.input_dim;
  auto x = random_values<float>(4, 5 * in);
  std::copy_n(x.begin(), in, x.begin() + 3 * in);  // sample 3 duplicates sample 0
  const auto y = enc.predict_batch(x.data(), 5, 3);
  for (int j = 0; j < c.output_dim; ++j) EXPECT_EQ(y[j], y[3 * c.output_dim + j]);
  std::vector<float> single(c.output_dim);
  enc.predict(x.data() + 2 * in, single.data());
  for (int j = 0; j < c.output_dim; ++j) EXPECT_EQ(single[j], y[2 * c.output_dim + j]);
}

TEST(Encoder, InitializationLayout) {
  const auto c = tiny_config();
  Encoder<double> enc(c, 11);
  std::size_t total = 0;
  for (const auto& t : enc.tensors()) {
    EXPECT_EQ(t.offset, total);
    total += t.size();
    const auto p = enc.params().subspan(t.offset, t.size());
    if (t.name.find("gamma") != std::string::npos) {
      for (double v : p) EXPECT_EQ(v, 1.0);
    } else if (t.rows == 1) {
      for (double v : p) EXPECT_EQ(v, 0.0);
    } else {
      const double bound = 1.0 / std::sqrt(t.rows);
      for (double v : p) EXPECT_LE(std::abs(v), bound);
    }
  }
  EXPECT_EQ(total, enc.param_count());
  Encoder<double> again(c, 11);
  EXPECT_TRUE(std::equal(enc.params().begin(), enc.params().end(), again.params().begin()));
}

// Central differences on every weight of the tiny configuration.
void gradient_check(EncoderConfig c, std::uint64_t seed) {
  Encoder<double> enc(c, seed);
  // Non-trivial biases and gains so every tensor carries signal.
  auto p = enc.params();
  const auto jitter = random_values<double>(seed + 1, p.size(), 0.2);
  for (const auto& t : enc.tensors())
    if (t.rows == 1)
      for (std::size_t i = 0; i < t.size(); ++i) p[t.offset + i] += jitter[t.offset + i];
  const std::size_t batch = 3;
  const auto x = random_values<double>(seed + 2, batch * c.seq_len * c.input_dim);
  const auto y = random_values<double>(seed + 3, batch * c.output_dim);
  std::vector<double> grad(p.size(), 0.0);
  enc.loss_and_gradient(x.data(), y.data(), batch, grad);
  const double h = 1e-4;
  for (const auto& t : enc.tensors()) {
    double worst = 0;
    for (std::size_t i = t.offset; i < t.offset + t.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + h;
      const double up = enc.loss(x.data(), y.data(), batch);
      p[i] = saved - h;
      const double down = enc.loss(x.data(), y.data(), batch);
      p[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double scale = std::max({std::abs(numeric), std::abs(grad[i]), 1e-6});
      worst = std::max(worst, std::abs(numeric - grad[i]) / scale);
    }
    EXPECT_LT(worst, 1e-4) << t.name;
  }
}

TEST(EncoderGradient, MatchesFiniteDifferences) { gradient_check(tiny_config(), 21); }

TEST(EncoderGradient, MatchesFiniteDifferencesLastPooling) {
  auto c = tiny_config();
  c.pooling = Pooling::Last;
  c.n_layers = 2;
  gradient_check(c, 22);
}

TEST(EncoderGradient, MatchesFiniteDifferencesGrouped) {
  auto c = tiny_config();
  c.grouped_input = true;
  c.feature_groups = {0, 0, 1, 1, 1};
  gradient_check(c, 23);
}

TEST(EncoderGradient, ZeroAtExactFit) {
  const auto c = tiny_config();
  Encoder<double> enc(c, 2);
  const auto x = random_values<double>(6, 4 * c.seq_len * c.input_dim);
  const auto y = enc.predict_batch(x.data(), 4);
  std::vector<double> grad(enc.param_count(), 0.0);
  EXPECT_EQ(enc.loss_and_gradient(x.data(), y.data(), 4, grad), 0.0);
  for (double g : grad) EXPECT_LE(std::abs(g), 1e-12);
}

TEST(EncoderGradient, LinearInLossScaleAndWorkerInvariant) {
  const auto c = tiny_config();
  Encoder<double> enc(c, 2);
  const auto x = random_values<double>(6, 5 * c.seq_len * c.input_dim);
  const auto y = random_values<double>(7, 5 * c.output_dim);
  std::vector<double> g1(enc.param_count(), 0.0), g2(enc.param_count(), 0.0), g3(enc.param_count(), 0.0);
  const double l1 = enc.loss_and_gradient(x.data(), y.data(), 5, g1);
  const double l2 = enc.loss_and_gradient(x.data(), y.data(), 5, g2, 2.0);
  enc.loss_and_gradient(x.data(), y.data(), 5, g3, 1.0, nullptr, 3);
  EXPECT_DOUBLE_EQ(l2, 2 * l1);
  EXPECT_NEAR(l1, enc.loss(x.data(), y.data(), 5), 1e-15);
  for (std::size_t i = 0; i < g1.size(); ++i) {
    EXPECT_EQ(g2[i], 2 * g1[i]);
    EXPECT_NEAR(g3[i], g1[i], 1e-14);
  }
}

TEST(EncoderDropout, MasksArePureFunctionsOfSeedAndSample) {
  auto c = tiny_config();
  c.dropout = 0.3;
  Encoder<double> enc(c, 2);
  const auto x = random_values<double>(6, 4 * c.seq_len * c.input_dim);
  const auto y = random_values<double>(7, 4 * c.output_dim);
  const DropoutContext ctx{99, 0};
  std::vector<double> a(enc.param_count(), 0.0), b(enc.param_count(), 0.0), off(enc.param_count(), 0.0);
  const double la = enc.loss_and_gradient(x.data(), y.data(), 4, a, 1.0, &ctx, 1);
  const double lb = enc.loss_and_gradient(x.data(), y.data(), 4, b, 1.0, &ctx, 2);
  const double lo = enc.loss_and_gradient(x.data(), y.data(), 4, off);
  EXPECT_EQ(la, lb);
  EXPECT_NE(la, lo);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
}

TEST(Metrics, HandComputedThreePointExample) {
  const std::vector<double> truth = {0, 1, 2};
  const std::vector<double> pred = {0, 1, 1};
  const std::vector<int> idx = {0};
  const auto m = compute_metrics(pred, truth, 3, idx);
  ASSERT_TRUE(m.targets[0].r2.has_value());
  EXPECT_EQ(*m.targets[0].r2, 0.5);
  EXPECT_EQ(m.targets[0].rmse, std::sqrt(1.0 / 3.0));
}

TEST(Metrics, PerfectAndMeanPredictors) {
  const std::vector<double> truth = {0.1, 0.4, 0.9, 0.3, 0.5, 0.2};  // 3 samples x 2 targets
  const std::vector<int> idx = {0, 1};
  const auto perfect = compute_metrics(truth, truth, 3, idx);
  for (const auto& t : perfect.targets) {
    EXPECT_EQ(*t.r2, 1.0);
    EXPECT_EQ(t.rmse, 0.0);
  }
  std::vector<double> mean_pred(6);
  for (int j = 0; j < 2; ++j) {
    const double mu = (truth[j] + truth[2 + j] + truth[4 + j]) / 3;
    for (int i = 0; i < 3; ++i) mean_pred[i * 2 + j] = mu;
  }
  const auto mean = compute_metrics(mean_pred, truth, 3, idx);
  for (const auto& t : mean.targets) EXPECT_NEAR(*t.r2, 0.0, 1e-12);
}

TEST(Metrics, ZeroVarianceTargetIsNotApplicable) {
  const std::vector<double> truth = {0.5, 0.0, 0.5, 1.0};
  const std::vector<double> pred = {0.4, 0.0, 0.6, 1.0};
  const std::vector<int> idx = {0, 1};
  const auto m = compute_metrics(pred, truth, 2, idx);
  EXPECT_FALSE(m.targets[0].r2.has_value());
  ASSERT_TRUE(m.mean_r2.has_value());
  EXPECT_EQ(*m.mean_r2, *m.targets[1].r2);
  EXPECT_EQ(m.targets[0].name, model::param_layout()[0].name);
}

TEST(Metrics, AgreesWithTwoPassOracle) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd(0.0, 1.0);
  const int n = 257, P = 5;
  std::vector<double> truth(n * P), pred(n * P);
  for (int i = 0; i < n * P; ++i) {
    truth[i] = 100.0 + nd(gen);
    pred[i] = truth[i] + 0.3 * nd(gen);
  }
  std::vector<int> idx(P);
  std::iota(idx.begin(), idx.end(), 0);
  const auto m = compute_metrics(pred, truth, n, idx);
  for (int j = 0; j < P; ++j) {
    std::vector<double> t(n), p(n);
    for (int i = 0; i < n; ++i) {
      t[i] = truth[i * P + j];
      p[i] = pred[i * P + j];
    }
    const auto o = armid::testing::two_pass_score(t, p);
    EXPECT_NEAR(*m.targets[j].r2, o.r2, 1e-10);
    EXPECT_NEAR(m.targets[j].rmse, o.rmse, 1e-12);
  }
}

TEST(Metrics, GroupMeans) {
  const auto& layout = model::param_layout();
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(layout.size()); ++i) idx.push_back(i);
  const int P = static_cast<int>(idx.size());
  std::vector<double> truth(2 * P), pred(2 * P);
  for (int j = 0; j < P; ++j) {
    truth[j] = 0;
    truth[P + j] = 1;
    // R² = 1 for Mass columns, 0.5 elsewhere.
    const bool mass = layout[j].group == model::ParamGroup::Mass;
    pred[j] = mass ? 0 : 0.5;
    pred[P + j] = mass ? 1 : 1;
  }
  const auto m = compute_metrics(pred, truth, 2, idx);
  EXPECT_DOUBLE_EQ(*m.group_mean_r2(model::ParamGroup::Mass), 1.0);
  EXPECT_DOUBLE_EQ(*m.group_mean_r2(model::ParamGroup::Viscous), 0.5);
}

TEST(Train, ZeroLearningRateLeavesWeightsUnchanged) {
  const auto ds = toy_dataset(40, 10, 4, 5, 3, 1);
  Encoder<double> enc(encoder_config_for(ds, tiny_config()), 4);
  const std::vector<double> before(enc.params().begin(), enc.params().end());
  TrainConfig tc;
  tc.learning_rate = 0.0;
  tc.epochs = 1;
  train(enc, ds, tc);
  EXPECT_TRUE(std::equal(before.begin(), before.end(), enc.params().begin()));
}

TEST(Train, SeededRunsAreIdentical) {
  const auto ds = toy_dataset(40, 10, 4, 5, 3, 1);
  auto cfg = encoder_config_for(ds, tiny_config());
  cfg.dropout = 0.1;
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 8;
  tc.seed = 12;
  Encoder<float> a(cfg, 4), b(cfg, 4);
  const auto ha = train(a, ds, tc);
  const auto hb = train(b, ds, tc, TrainOptions{2, {}});
  ASSERT_EQ(ha.epochs.size(), hb.epochs.size());
  EXPECT_EQ(ha.epochs[0].train_loss, hb.epochs[0].train_loss);
  for (std::size_t i = 0; i < a.param_count(); ++i) EXPECT_NEAR(a.params()[i], b.params()[i], 1e-6);
}

TEST(Train, MonotoneDescentAtSmallLearningRate) {
  const auto ds = toy_dataset(16, 4, 4, 5, 3, 2);
  Encoder<double> enc(encoder_config_for(ds, tiny_config()), 8);
  TrainConfig tc;
  tc.learning_rate = 1e-5;
  tc.batch_size = 16;  // the whole split is one fixed batch
  tc.epochs = 50;
  tc.patience = 0;
  std::vector<double> losses;
  TrainOptions opts;
  opts.on_epoch = [&](const EpochRecord& r) { losses.push_back(r.train_loss); };
  train(enc, ds, tc, opts);
  ASSERT_EQ(losses.size(), 50u);
  for (std::size_t i = 1; i < losses.size(); ++i) EXPECT_LE(losses[i], losses[i - 1]) << "epoch " << i;
  EXPECT_LT(losses.back(), losses.front());
}

TEST(Train, LearnsToyProblemAndRestoresBestWeights) {
  const auto ds = toy_dataset(256, 64, 4, 5, 3, 3);
  Encoder<float> enc(encoder_config_for(ds, tiny_config()), 1);
  TrainConfig tc;
  tc.learning_rate = 3e-3;
  tc.epochs = 40;
  tc.batch_size = 16;
  const auto h = train(enc, ds, tc);
  ASSERT_GE(h.best_epoch, 0);
  const auto best = *h.epochs[h.best_epoch].val_mean_r2;
  for (const auto& r : h.epochs) EXPECT_LE(*r.val_mean_r2, best);
  const auto m = evaluate(enc, ds.val, ds.target_index);
  EXPECT_NEAR(*m.mean_r2, best, 1e-9);
  EXPECT_GT(best, 0.5);
}

TEST(Train, RejectsBadInputs) {
  auto ds = toy_dataset(8, 2, 4, 5, 3, 1);
  Encoder<double> enc(encoder_config_for(ds, tiny_config()), 4);
  TrainConfig tc;
  tc.beta1 = 1.0;
  EXPECT_THROW(train(enc, ds, tc), Error);
  tc = TrainConfig{};
  ds.val.count = 0;
  EXPECT_THROW(train(enc, ds, tc), Error);
  auto ds2 = toy_dataset(8, 2, 4, 6, 3, 1);
  EXPECT_THROW(train(enc, ds2, TrainConfig{}), Error);
}

TEST(Train, DivergenceCarriesEpoch) {
  auto ds = toy_dataset(8, 2, 4, 5, 3, 1);
  ds.train.targets[0] = std::numeric_limits<double>::infinity();
  Encoder<double> enc(encoder_config_for(ds, tiny_config()), 4);
  try {
    train(enc, ds, TrainConfig{});
    FAIL() << "expected divergence";
  } catch (const TrainingDivergedError& e) {
    EXPECT_EQ(e.epoch(), 0);
  }
}

TEST(Train, FeatureJointFromNames) {
  EXPECT_EQ(feature_joint("q3"), 3);
  EXPECT_EQ(feature_joint("tau0"), 0);
  EXPECT_EQ(feature_joint("jz.L4.J2"), 2);
  EXPECT_EQ(feature_joint("vx.L6.J5"), 5);
  EXPECT_EQ(feature_joint("bias"), -1);
}

TEST(Checkpoint, RoundTripAndWidthConversion) {
  auto c = tiny_config();
  c.grouped_input = true;
  c.feature_groups = {0, 1, 1, 2, 2};
  c.pooling = Pooling::Last;
  Encoder<double> enc(c, 77);
  const auto dir = std::filesystem::temp_directory_path() / "armid_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.bin";
  write_checkpoint(path, enc);
  const auto back = read_checkpoint<double>(path);
  EXPECT_TRUE(std::equal(enc.params().begin(), enc.params().end(), back.params().begin()));
  EXPECT_EQ(back.config().feature_groups, c.feature_groups);
  EXPECT_EQ(back.config().pooling, Pooling::Last);
  const auto narrow = read_checkpoint<float>(path);
  for (std::size_t i = 0; i < enc.param_count(); ++i)
    EXPECT_EQ(narrow.params()[i], static_cast<float>(enc.params()[i]));

  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 3);
  EXPECT_THROW(read_checkpoint<double>(path), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace armid::nn
