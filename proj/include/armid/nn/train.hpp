#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "armid/data/dataset.hpp"
#include "armid/nn/encoder.hpp"
#include "armid/nn/metrics.hpp"

namespace armid::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 100;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 1.0;  // global L2 norm; 0 disables clipping
  int patience = 20;       // epochs without validation improvement; 0 disables
  bool restore_best = true;  // end with the best-validation weights, else the last

  /// Throws armid::Error(Config).
  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // mean over the epoch's batches
  double val_loss = 0.0;
  std::optional<double> val_mean_r2;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  bool early_stopped = false;
};

struct TrainOptions {
  int workers = 1;
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Adam with global-norm clipping. Early stopping watches validation mean R²
/// (validation loss when no R² is defined); with restore_best the best weights
/// are restored at the end. Throws TrainingDivergedError on a non-finite loss and
/// armid::Error(Config) for an empty split or a shape mismatch.
template <typename T>
TrainHistory train(Encoder<T>& model, const data::Dataset& dataset, const TrainConfig& config,
                   const TrainOptions& options = {});

template <typename T>
Metrics evaluate(const Encoder<T>& model, const data::SampleSet& split, std::span<const int> target_index,
                 int workers = 1);

/// Copies dataset shapes into `base` (seq_len, input and output widths) and,
/// in grouped mode, derives one feature group per joint from the column names.
EncoderConfig encoder_config_for(const data::Dataset& dataset, EncoderConfig base);

/// Joint index encoded in a feature name ("q3", "tau0", "jz.L4.J2"), or -1.
int feature_joint(const std::string& name);

extern template TrainHistory train<float>(Encoder<float>&, const data::Dataset&, const TrainConfig&,
                                          const TrainOptions&);
extern template TrainHistory train<double>(Encoder<double>&, const data::Dataset&, const TrainConfig&,
                                           const TrainOptions&);
extern template Metrics evaluate<float>(const Encoder<float>&, const data::SampleSet&, std::span<const int>, int);
extern template Metrics evaluate<double>(const Encoder<double>&, const data::SampleSet&, std::span<const int>, int);

}  // namespace armid::nn
