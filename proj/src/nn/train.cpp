#include "armid/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "armid/core/error.hpp"
#include "armid/core/rng.hpp"

namespace armid::nn {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::Config, "train config: " + what); };
  if (!(learning_rate >= 0.0)) fail("learning_rate must be >= 0");
  if (batch_size <= 0) fail("batch_size must be positive");
  if (epochs <= 0) fail("epochs must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) fail("betas must lie in (0, 1)");
  if (!(epsilon > 0.0)) fail("epsilon must be positive");
  if (!(clip_norm >= 0.0)) fail("clip_norm must be >= 0");
  if (patience < 0) fail("patience must be >= 0");
}

int feature_joint(const std::string& name) {
  const auto pos = name.rfind(".J");
  std::size_t start = 0;
  if (pos != std::string::npos) {
    start = pos + 2;
  } else {
    start = name.find_first_of("0123456789");
    if (start == std::string::npos || start == 0) return -1;
  }
  if (start >= name.size()) return -1;
  int v = 0;
  for (std::size_t i = start; i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9') return -1;
    v = v * 10 + (name[i] - '0');
  }
  return v;
}

EncoderConfig encoder_config_for(const data::Dataset& dataset, EncoderConfig base) {
  base.seq_len = dataset.seq_len;
  base.input_dim = dataset.feature_count;
  base.output_dim = dataset.target_count;
  if (base.grouped_input) {
    base.feature_groups.clear();
    for (const auto& name : dataset.feature_names) {
      const int j = feature_joint(name);
      if (j < 0) throw Error(ErrorKind::Config, "grouped input: no joint in feature name " + name);
      base.feature_groups.push_back(j);
    }
    // Compact the ids so pruned joints leave no empty slice.
    std::vector<int> ids = base.feature_groups;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (auto& g : base.feature_groups) g = static_cast<int>(std::lower_bound(ids.begin(), ids.end(), g) - ids.begin());
  }
  base.validate();
  return base;
}

namespace {

template <typename T>
std::vector<T> convert(const std::vector<double>& v) {
  return std::vector<T>(v.begin(), v.end());
}

void check_shapes(const EncoderConfig& cfg, const data::Dataset& ds) {
  if (cfg.seq_len != ds.seq_len || cfg.input_dim != ds.feature_count || cfg.output_dim != ds.target_count)
    throw Error(ErrorKind::Config, "encoder shape does not match the dataset");
}

// Higher is better; R² when defined, else negative loss.
double score(const EpochRecord& r) { return r.val_mean_r2 ? *r.val_mean_r2 : -r.val_loss; }

}  // namespace

template <typename T>
Metrics evaluate(const Encoder<T>& model, const data::SampleSet& split, std::span<const int> target_index,
                 int workers) {
  if (split.count == 0) throw Error(ErrorKind::Config, "cannot evaluate an empty split");
  if (static_cast<int>(target_index.size()) != model.config().output_dim)
    throw Error(ErrorKind::Contract, "target index does not match the model output");
  const auto x = convert<T>(split.features);
  const auto pred = model.predict_batch(x.data(), split.count, workers);
  const std::vector<double> p(pred.begin(), pred.end());
  return compute_metrics(p, split.targets, split.count, target_index);
}

template <typename T>
TrainHistory train(Encoder<T>& model, const data::Dataset& dataset, const TrainConfig& config,
                   const TrainOptions& options) {
  config.validate();
  check_shapes(model.config(), dataset);
  if (dataset.train.count == 0 || dataset.val.count == 0)
    throw Error(ErrorKind::Config, "training needs non-empty train and validation splits");

  const std::size_t in = static_cast<std::size_t>(dataset.seq_len) * dataset.feature_count;
  const std::size_t P = static_cast<std::size_t>(dataset.target_count);
  const auto x_train = convert<T>(dataset.train.features);
  const auto y_train = convert<T>(dataset.train.targets);
  const auto x_val = convert<T>(dataset.val.features);
  const auto y_val = convert<T>(dataset.val.targets);

  auto params = model.params();
  const std::size_t n_params = params.size();
  std::vector<double> m(n_params, 0.0), v(n_params, 0.0);
  std::vector<T> grad(n_params);
  std::vector<T> xb, yb;
  std::vector<T> best(params.begin(), params.end());
  double best_score = -INFINITY;

  std::vector<std::size_t> order(dataset.train.count);
  Rng rng(derive_seed(config.seed, 0x7a1));
  TrainHistory history;
  std::uint64_t step = 0;
  int since_best = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t n = std::min<std::size_t>(config.batch_size, order.size() - start);
      xb.resize(n * in);
      yb.resize(n * P);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t s = order[start + i];
        std::copy_n(x_train.begin() + static_cast<long>(s * in), in, xb.begin() + static_cast<long>(i * in));
        std::copy_n(y_train.begin() + static_cast<long>(s * P), P, yb.begin() + static_cast<long>(i * P));
      }
      std::fill(grad.begin(), grad.end(), T(0));
      const DropoutContext drop{derive_seed(config.seed, 0xd000 + static_cast<std::uint64_t>(epoch)), start};
      const double loss = model.loss_and_gradient(xb.data(), yb.data(), n, grad, 1.0, &drop, options.workers);
      if (!std::isfinite(loss)) throw TrainingDivergedError(epoch);
      loss_sum += loss;
      ++batches;

      double norm2 = 0.0;
      for (T g : grad) norm2 += static_cast<double>(g) * g;
      if (!std::isfinite(norm2)) throw TrainingDivergedError(epoch);
      const double norm = std::sqrt(norm2);
      const double clip = config.clip_norm > 0.0 && norm > config.clip_norm ? config.clip_norm / norm : 1.0;

      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < n_params; ++i) {
        const double g = grad[i] * clip;
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
        const double upd = config.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.epsilon);
        params[i] = static_cast<T>(params[i] - upd);
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    const auto pred = model.predict_batch(x_val.data(), dataset.val.count, options.workers);
    double se = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double r = static_cast<double>(pred[i]) - y_val[i];
      se += r * r;
    }
    rec.val_loss = se / static_cast<double>(pred.size());
    if (!std::isfinite(rec.val_loss)) throw TrainingDivergedError(epoch);
    const std::vector<double> pd(pred.begin(), pred.end());
    rec.val_mean_r2 = compute_metrics(pd, dataset.val.targets, dataset.val.count, dataset.target_index).mean_r2;
    history.epochs.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);

    if (score(rec) > best_score) {
      best_score = score(rec);
      history.best_epoch = epoch;
      std::copy(params.begin(), params.end(), best.begin());
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      history.early_stopped = true;
      break;
    }
  }
  if (config.restore_best) std::copy(best.begin(), best.end(), params.begin());
  return history;
}

template TrainHistory train<float>(Encoder<float>&, const data::Dataset&, const TrainConfig&, const TrainOptions&);
template TrainHistory train<double>(Encoder<double>&, const data::Dataset&, const TrainConfig&, const TrainOptions&);
template Metrics evaluate<float>(const Encoder<float>&, const data::SampleSet&, std::span<const int>, int);
template Metrics evaluate<double>(const Encoder<double>&, const data::SampleSet&, std::span<const int>, int);

}  // namespace armid::nn
