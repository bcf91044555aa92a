#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace armid::nn {

enum class Pooling { Mean, Last };

struct EncoderConfig {
  int d_model = 32;
  int n_layers = 2;
  int n_heads = 4;
  int d_ff = 64;
  double dropout = 0.0;
  int seq_len = 16;
  int input_dim = 0;
  int output_dim = 0;
  Pooling pooling = Pooling::Mean;
  bool positional_encoding = true;
  // Grouped input projection: feature f feeds only the d_model slice owned by
  // feature_groups[f] (slices split d_model evenly across the groups).
  bool grouped_input = false;
  std::vector<int> feature_groups;

  /// Throws armid::Error(Config).
  void validate() const;
  int group_count() const;
};

/// Sinusoidal table, seq_len x d_model row-major:
/// PE(pos, 2i) = sin(pos / 10000^(2i/d)), PE(pos, 2i+1) = cos(same angle).
std::vector<double> positional_encoding(int seq_len, int d_model);

struct TensorInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

/// Per-sample dropout stream; masks are a pure function of (seed, sample).
struct DropoutContext {
  std::uint64_t seed = 0;
  std::uint64_t first_sample = 0;
};

/// Post-LN transformer encoder regressor: input projection, positional
/// encoding, n_layers x (multi-head self-attention, ReLU feed-forward), time
/// pooling and a linear head. All weights live in one flat buffer described
/// by tensors(); matrices are stored (in x out) so a layer computes x * W.
template <typename T>
class Encoder {
 public:
  Encoder(const EncoderConfig& config, std::uint64_t seed);

  const EncoderConfig& config() const { return config_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  std::span<T> params() { return params_; }
  std::span<const T> params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  /// One sample: x is seq_len x input_dim, out receives output_dim values.
  void predict(const T* x, T* out) const;

  /// Predictions for `count` contiguous samples, count x output_dim.
  std::vector<T> predict_batch(const T* x, std::size_t count, int workers = 1) const;

  /// Attention probabilities of every layer and head for one sample,
  /// layer-major then head-major, each seq_len x seq_len.
  std::vector<T> attention_maps(const T* x) const;

  /// loss = loss_scale * mean over samples and outputs of (y - t)^2.
  /// Adds d loss / d params into grad (same layout as params()). With a
  /// dropout context, dropout is active; without, the pass is deterministic.
  double loss_and_gradient(const T* x, const T* targets, std::size_t count, std::span<T> grad,
                           double loss_scale = 1.0, const DropoutContext* dropout = nullptr,
                           int workers = 1) const;

  /// Mean squared error without gradients.
  double loss(const T* x, const T* targets, std::size_t count, int workers = 1) const;

  /// Load weights from another precision.
  template <typename U>
  void assign_from(const Encoder<U>& other) {
    auto src = other.params();
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i] = static_cast<T>(src[i]);
  }

  struct Impl;

 private:
  EncoderConfig config_;
  std::vector<TensorInfo> tensors_;
  std::vector<T> params_;
  std::vector<T> pe_;
  std::vector<T> input_mask_;  // input_dim x d_model, grouped mode only
};

extern template class Encoder<float>;
extern template class Encoder<double>;

}  // namespace armid::nn
