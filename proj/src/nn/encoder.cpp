#include "armid/nn/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "armid/core/error.hpp"
#include "armid/core/parallel.hpp"
#include "armid/core/rng.hpp"
#include "armid/simd/kernels.hpp"

namespace armid::nn {

void EncoderConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::Config, "encoder config: " + what); };
  if (d_model <= 0 || n_layers <= 0 || n_heads <= 0 || d_ff <= 0 || seq_len <= 0 || input_dim <= 0 || output_dim <= 0)
    fail("all dimensions must be positive");
  if (d_model % n_heads != 0) fail("d_model must be divisible by n_heads");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (grouped_input) {
    if (static_cast<int>(feature_groups.size()) != input_dim) fail("feature_groups needs one entry per input");
    const int g = group_count();
    for (int v : feature_groups)
      if (v < 0) fail("feature group ids must be >= 0");
    if (g > d_model) fail("more feature groups than d_model");
  }
}

int EncoderConfig::group_count() const {
  int g = 0;
  for (int v : feature_groups) g = std::max(g, v + 1);
  return g;
}

std::vector<double> positional_encoding(int seq_len, int d_model) {
  if (seq_len <= 0 || d_model <= 0) throw Error(ErrorKind::Domain, "positional_encoding needs positive dims");
  std::vector<double> pe(static_cast<std::size_t>(seq_len) * d_model);
  for (int pos = 0; pos < seq_len; ++pos) {
    for (int i = 0; 2 * i < d_model; ++i) {
      const double angle = pos / std::pow(10000.0, (2.0 * i) / d_model);
      pe[pos * d_model + 2 * i] = std::sin(angle);
      if (2 * i + 1 < d_model) pe[pos * d_model + 2 * i + 1] = std::cos(angle);
    }
  }
  return pe;
}

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr std::size_t kGradientChunks = 8;

// Tensor slots inside one encoder layer.
enum Slot : int { Wq, Bq, Wk, Bk, Wv, Bv, Wo, Bo, G1, Be1, W1, B1, W2, B2, G2, Be2, kSlots };
constexpr const char* kSlotNames[kSlots] = {"attn.Wq", "attn.bq", "attn.Wk", "attn.bk", "attn.Wv", "attn.bv",
                                            "attn.Wo", "attn.bo", "ln1.gamma", "ln1.beta", "ffn.W1", "ffn.b1",
                                            "ffn.W2", "ffn.b2", "ln2.gamma", "ln2.beta"};

template <typename T>
struct LayerCache {
  std::vector<T> x, q, k, v, p, o, m1, xhat1, rstd1, h1, f, m2, xhat2, rstd2, out;
};

template <typename T>
struct Cache {
  std::vector<T> w_in;  // masked input projection (grouped mode)
  std::vector<T> h0;
  std::vector<LayerCache<T>> layers;
  std::vector<T> z, y;
  // Backward scratch.
  std::vector<T> dx, dh1, dr, df, da, d_o, dq, dk, dv, dp, dz, dy;
};

template <typename T>
void broadcast_rows(T* dst, const T* row, int rows, int cols) {
  for (int r = 0; r < rows; ++r) std::copy(row, row + cols, dst + static_cast<long>(r) * cols);
}

template <typename T>
void add_colsum(T* acc, const T* m, int rows, int cols) {
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) acc[c] += m[static_cast<long>(r) * cols + c];
}

template <typename T>
void layer_norm(const T* in, const T* gamma, const T* beta, int rows, int cols, T* xhat, T* rstd, T* out) {
  for (int r = 0; r < rows; ++r) {
    const T* x = in + static_cast<long>(r) * cols;
    double mu = 0.0;
    for (int c = 0; c < cols; ++c) mu += x[c];
    mu /= cols;
    double var = 0.0;
    for (int c = 0; c < cols; ++c) var += (x[c] - mu) * (x[c] - mu);
    var /= cols;
    const T rs = static_cast<T>(1.0 / std::sqrt(var + kLayerNormEps));
    rstd[r] = rs;
    for (int c = 0; c < cols; ++c) {
      const T xh = static_cast<T>((x[c] - mu)) * rs;
      xhat[static_cast<long>(r) * cols + c] = xh;
      out[static_cast<long>(r) * cols + c] = gamma[c] * xh + beta[c];
    }
  }
}

// dy -> dx (overwrites dx); accumulates gamma/beta gradients.
template <typename T>
void layer_norm_backward(const T* dy, const T* xhat, const T* rstd, const T* gamma, int rows, int cols, T* dgamma,
                         T* dbeta, T* dx) {
  for (int r = 0; r < rows; ++r) {
    const T* g = dy + static_cast<long>(r) * cols;
    const T* xh = xhat + static_cast<long>(r) * cols;
    double mean_d = 0.0;
    double mean_dx = 0.0;
    for (int c = 0; c < cols; ++c) {
      dgamma[c] += g[c] * xh[c];
      dbeta[c] += g[c];
      const double d = static_cast<double>(g[c]) * gamma[c];
      mean_d += d;
      mean_dx += d * xh[c];
    }
    mean_d /= cols;
    mean_dx /= cols;
    for (int c = 0; c < cols; ++c) {
      const double d = static_cast<double>(g[c]) * gamma[c];
      dx[static_cast<long>(r) * cols + c] = static_cast<T>(rstd[r] * (d - mean_d - xh[c] * mean_dx));
    }
  }
}

template <typename T>
void softmax_rows(T* m, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    T* row = m + static_cast<long>(r) * cols;
    const T mx = *std::max_element(row, row + cols);
    double sum = 0.0;
    for (int c = 0; c < cols; ++c) {
      row[c] = static_cast<T>(std::exp(static_cast<double>(row[c] - mx)));
      sum += row[c];
    }
    const T inv = static_cast<T>(1.0 / sum);
    for (int c = 0; c < cols; ++c) row[c] *= inv;
  }
}

template <typename T>
void dropout_mask(std::vector<T>& mask, std::size_t n, double rate, Rng& rng) {
  mask.resize(n);
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  for (auto& m : mask) m = rng.uniform() < rate ? T(0) : keep_scale;
}

}  // namespace

template <typename T>
struct Encoder<T>::Impl {
  static std::size_t tensor(const Encoder& e, int layer, Slot slot) {
    return e.tensors_[2 + layer * kSlots + slot].offset;
  }
  static std::size_t head_w(const Encoder& e) { return e.tensors_[2 + e.config_.n_layers * kSlots].offset; }
  static std::size_t head_b(const Encoder& e) { return e.tensors_[3 + e.config_.n_layers * kSlots].offset; }

  static void forward(const Encoder& e, const T* x, Cache<T>& c, Rng* dropout_rng) {
    const auto& K = simd::active_kernels<T>();
    const auto& cfg = e.config_;
    const int S = cfg.seq_len, D = cfg.d_model, F = cfg.input_dim, H = cfg.n_heads, dh = D / H, Dff = cfg.d_ff;
    const T* p = e.params_.data();
    const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));

    const T* w_in = p + e.tensors_[0].offset;
    if (cfg.grouped_input) {
      c.w_in.assign(w_in, w_in + static_cast<long>(F) * D);
      for (std::size_t i = 0; i < c.w_in.size(); ++i) c.w_in[i] *= e.input_mask_[i];
      w_in = c.w_in.data();
    }
    c.h0.resize(static_cast<std::size_t>(S) * D);
    broadcast_rows(c.h0.data(), p + e.tensors_[1].offset, S, D);
    if (cfg.positional_encoding)
      for (std::size_t i = 0; i < c.h0.size(); ++i) c.h0[i] += e.pe_[i];
    K.gemm_nn(S, D, F, x, F, w_in, D, c.h0.data(), D);

    c.layers.resize(cfg.n_layers);
    const T* in = c.h0.data();
    for (int l = 0; l < cfg.n_layers; ++l) {
      auto& L = c.layers[l];
      auto w = [&](Slot s) { return p + tensor(e, l, s); };
      const std::size_t SD = static_cast<std::size_t>(S) * D;
      L.x.assign(in, in + SD);
      L.q.resize(SD);
      L.k.resize(SD);
      L.v.resize(SD);
      broadcast_rows(L.q.data(), w(Bq), S, D);
      broadcast_rows(L.k.data(), w(Bk), S, D);
      broadcast_rows(L.v.data(), w(Bv), S, D);
      K.gemm_nn(S, D, D, L.x.data(), D, w(Wq), D, L.q.data(), D);
      K.gemm_nn(S, D, D, L.x.data(), D, w(Wk), D, L.k.data(), D);
      K.gemm_nn(S, D, D, L.x.data(), D, w(Wv), D, L.v.data(), D);

      L.p.assign(static_cast<std::size_t>(H) * S * S, T(0));
      L.o.assign(SD, T(0));
      for (int h = 0; h < H; ++h) {
        T* ph = L.p.data() + static_cast<long>(h) * S * S;
        K.gemm_nt(S, S, dh, L.q.data() + h * dh, D, L.k.data() + h * dh, D, ph, S);
        for (int i = 0; i < S * S; ++i) ph[i] *= scale;
        softmax_rows(ph, S, S);
        K.gemm_nn(S, dh, S, ph, S, L.v.data() + h * dh, D, L.o.data() + h * dh, D);
      }

      std::vector<T> r(SD);
      broadcast_rows(r.data(), w(Bo), S, D);
      K.gemm_nn(S, D, D, L.o.data(), D, w(Wo), D, r.data(), D);
      if (dropout_rng) {
        dropout_mask(L.m1, SD, cfg.dropout, *dropout_rng);
        for (std::size_t i = 0; i < SD; ++i) r[i] *= L.m1[i];
      } else {
        L.m1.clear();
      }
      for (std::size_t i = 0; i < SD; ++i) r[i] += L.x[i];
      L.xhat1.resize(SD);
      L.rstd1.resize(S);
      L.h1.resize(SD);
      layer_norm(r.data(), w(G1), w(Be1), S, D, L.xhat1.data(), L.rstd1.data(), L.h1.data());

      const std::size_t SF = static_cast<std::size_t>(S) * Dff;
      L.f.resize(SF);
      broadcast_rows(L.f.data(), w(B1), S, Dff);
      K.gemm_nn(S, Dff, D, L.h1.data(), D, w(W1), Dff, L.f.data(), Dff);
      for (auto& v : L.f) v = v > T(0) ? v : T(0);
      broadcast_rows(r.data(), w(B2), S, D);
      K.gemm_nn(S, D, Dff, L.f.data(), Dff, w(W2), D, r.data(), D);
      if (dropout_rng) {
        dropout_mask(L.m2, SD, cfg.dropout, *dropout_rng);
        for (std::size_t i = 0; i < SD; ++i) r[i] *= L.m2[i];
      } else {
        L.m2.clear();
      }
      for (std::size_t i = 0; i < SD; ++i) r[i] += L.h1[i];
      L.xhat2.resize(SD);
      L.rstd2.resize(S);
      L.out.resize(SD);
      layer_norm(r.data(), w(G2), w(Be2), S, D, L.xhat2.data(), L.rstd2.data(), L.out.data());
      in = L.out.data();
    }

    c.z.assign(D, T(0));
    if (cfg.pooling == Pooling::Mean) {
      for (int s = 0; s < S; ++s)
        for (int d = 0; d < D; ++d) c.z[d] += in[static_cast<long>(s) * D + d];
      for (auto& v : c.z) v /= static_cast<T>(S);
    } else {
      std::copy(in + static_cast<long>(S - 1) * D, in + static_cast<long>(S) * D, c.z.begin());
    }
    const int P = cfg.output_dim;
    c.y.assign(p + head_b(e), p + head_b(e) + P);
    K.gemm_nn(1, P, D, c.z.data(), D, p + head_w(e), P, c.y.data(), P);
  }

  // Accumulates gradients of sum_p dy[p] * y[p] into g.
  static void backward(const Encoder& e, const T* x, Cache<T>& c, const T* dy, T* g) {
    const auto& K = simd::active_kernels<T>();
    const auto& cfg = e.config_;
    const int S = cfg.seq_len, D = cfg.d_model, F = cfg.input_dim, H = cfg.n_heads, dh = D / H, Dff = cfg.d_ff,
              P = cfg.output_dim;
    const T* p = e.params_.data();
    const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));
    const std::size_t SD = static_cast<std::size_t>(S) * D;

    K.gemm_tn(D, P, 1, c.z.data(), D, dy, P, g + head_w(e), P);
    for (int j = 0; j < P; ++j) g[head_b(e) + j] += dy[j];
    c.dz.assign(D, T(0));
    K.gemm_nt(1, D, P, dy, P, p + head_w(e), P, c.dz.data(), D);

    c.dx.assign(SD, T(0));
    if (cfg.pooling == Pooling::Mean) {
      const T inv = T(1) / static_cast<T>(S);
      for (int s = 0; s < S; ++s)
        for (int d = 0; d < D; ++d) c.dx[static_cast<long>(s) * D + d] = c.dz[d] * inv;
    } else {
      std::copy(c.dz.begin(), c.dz.end(), c.dx.begin() + static_cast<long>(S - 1) * D);
    }

    for (int l = cfg.n_layers - 1; l >= 0; --l) {
      auto& L = c.layers[l];
      auto w = [&](Slot s) { return p + tensor(e, l, s); };
      auto gw = [&](Slot s) { return g + tensor(e, l, s); };

      // Second residual block.
      c.dh1.resize(SD);
      layer_norm_backward(c.dx.data(), L.xhat2.data(), L.rstd2.data(), w(G2), S, D, gw(G2), gw(Be2), c.dh1.data());
      c.dr.assign(c.dh1.begin(), c.dh1.end());
      if (!L.m2.empty())
        for (std::size_t i = 0; i < SD; ++i) c.dr[i] *= L.m2[i];
      K.gemm_tn(Dff, D, S, L.f.data(), Dff, c.dr.data(), D, gw(W2), D);
      add_colsum(gw(B2), c.dr.data(), S, D);
      c.df.assign(static_cast<std::size_t>(S) * Dff, T(0));
      K.gemm_nt(S, Dff, D, c.dr.data(), D, w(W2), D, c.df.data(), Dff);
      for (std::size_t i = 0; i < c.df.size(); ++i)
        if (!(L.f[i] > T(0))) c.df[i] = T(0);
      K.gemm_tn(D, Dff, S, L.h1.data(), D, c.df.data(), Dff, gw(W1), Dff);
      add_colsum(gw(B1), c.df.data(), S, Dff);
      K.gemm_nt(S, D, Dff, c.df.data(), Dff, w(W1), Dff, c.dh1.data(), D);

      // First residual block.
      layer_norm_backward(c.dh1.data(), L.xhat1.data(), L.rstd1.data(), w(G1), S, D, gw(G1), gw(Be1), c.dx.data());
      c.da.assign(c.dx.begin(), c.dx.end());
      if (!L.m1.empty())
        for (std::size_t i = 0; i < SD; ++i) c.da[i] *= L.m1[i];
      K.gemm_tn(D, D, S, L.o.data(), D, c.da.data(), D, gw(Wo), D);
      add_colsum(gw(Bo), c.da.data(), S, D);
      c.d_o.assign(SD, T(0));
      K.gemm_nt(S, D, D, c.da.data(), D, w(Wo), D, c.d_o.data(), D);

      c.dq.assign(SD, T(0));
      c.dk.assign(SD, T(0));
      c.dv.assign(SD, T(0));
      c.dp.resize(static_cast<std::size_t>(S) * S);
      for (int h = 0; h < H; ++h) {
        const T* ph = L.p.data() + static_cast<long>(h) * S * S;
        std::fill(c.dp.begin(), c.dp.end(), T(0));
        K.gemm_nt(S, S, dh, c.d_o.data() + h * dh, D, L.v.data() + h * dh, D, c.dp.data(), S);
        K.gemm_tn(S, dh, S, ph, S, c.d_o.data() + h * dh, D, c.dv.data() + h * dh, D);
        for (int i = 0; i < S; ++i) {
          T* dpi = c.dp.data() + static_cast<long>(i) * S;
          const T* pi = ph + static_cast<long>(i) * S;
          double row = 0.0;
          for (int j = 0; j < S; ++j) row += static_cast<double>(dpi[j]) * pi[j];
          for (int j = 0; j < S; ++j) dpi[j] = pi[j] * (dpi[j] - static_cast<T>(row)) * scale;
        }
        K.gemm_nn(S, dh, S, c.dp.data(), S, L.k.data() + h * dh, D, c.dq.data() + h * dh, D);
        K.gemm_tn(S, dh, S, c.dp.data(), S, L.q.data() + h * dh, D, c.dk.data() + h * dh, D);
      }
      // Residual path already sits in c.dx; add the three projections.
      const std::pair<Slot, std::vector<T>*> proj[3] = {{Wq, &c.dq}, {Wk, &c.dk}, {Wv, &c.dv}};
      for (const auto& [slot, grad] : proj) {
        const Slot bias = static_cast<Slot>(slot + 1);
        K.gemm_tn(D, D, S, L.x.data(), D, grad->data(), D, gw(slot), D);
        add_colsum(gw(bias), grad->data(), S, D);
        K.gemm_nt(S, D, D, grad->data(), D, w(slot), D, c.dx.data(), D);
      }
    }

    T* gw_in = g + e.tensors_[0].offset;
    if (cfg.grouped_input) {
      std::vector<T> tmp(static_cast<std::size_t>(F) * D, T(0));
      K.gemm_tn(F, D, S, x, F, c.dx.data(), D, tmp.data(), D);
      for (std::size_t i = 0; i < tmp.size(); ++i) gw_in[i] += tmp[i] * e.input_mask_[i];
    } else {
      K.gemm_tn(F, D, S, x, F, c.dx.data(), D, gw_in, D);
    }
    add_colsum(g + e.tensors_[1].offset, c.dx.data(), S, D);
  }
};

template <typename T>
Encoder<T>::Encoder(const EncoderConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const int D = config_.d_model, F = config_.input_dim, Dff = config_.d_ff, P = config_.output_dim;
  std::size_t offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    tensors_.push_back({std::move(name), rows, cols, offset});
    offset += static_cast<std::size_t>(rows) * cols;
  };
  add("embed.W", F, D);
  add("embed.b", 1, D);
  for (int l = 0; l < config_.n_layers; ++l) {
    const std::string pre = "layer" + std::to_string(l) + ".";
    for (int s = 0; s < kSlots; ++s) {
      int rows = 1, cols = D;
      switch (s) {
        case Wq: case Wk: case Wv: case Wo: rows = D; break;
        case W1: rows = D; cols = Dff; break;
        case B1: cols = Dff; break;
        case W2: rows = Dff; break;
        default: break;
      }
      add(pre + kSlotNames[s], rows, cols);
    }
  }
  add("head.W", D, P);
  add("head.b", 1, P);
  params_.assign(offset, T(0));

  // Uniform fan-in init for matrices; zero biases; unit layer-norm gains.
  Rng rng(derive_seed(seed, 0x1417));
  for (const auto& t : tensors_) {
    const bool is_gain = t.name.find("gamma") != std::string::npos;
    if (is_gain) {
      std::fill(params_.begin() + t.offset, params_.begin() + t.offset + t.size(), T(1));
    } else if (t.rows > 1) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(t.rows));
      for (std::size_t i = 0; i < t.size(); ++i) params_[t.offset + i] = static_cast<T>(rng.uniform(-bound, bound));
    }
  }

  const auto pe = positional_encoding(config_.seq_len, D);
  pe_.assign(pe.begin(), pe.end());

  if (config_.grouped_input) {
    const int G = config_.group_count();
    input_mask_.assign(static_cast<std::size_t>(F) * D, T(0));
    for (int f = 0; f < F; ++f)
      for (int d = 0; d < D; ++d)
        if (d * G / D == config_.feature_groups[f]) input_mask_[static_cast<std::size_t>(f) * D + d] = T(1);
    for (std::size_t i = 0; i < input_mask_.size(); ++i) params_[tensors_[0].offset + i] *= input_mask_[i];
  }
}

template <typename T>
void Encoder<T>::predict(const T* x, T* out) const {
  Cache<T> c;
  Impl::forward(*this, x, c, nullptr);
  std::copy(c.y.begin(), c.y.end(), out);
}

template <typename T>
std::vector<T> Encoder<T>::predict_batch(const T* x, std::size_t count, int workers) const {
  const std::size_t in = static_cast<std::size_t>(config_.seq_len) * config_.input_dim;
  const std::size_t P = static_cast<std::size_t>(config_.output_dim);
  std::vector<T> out(count * P);
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(count, static_cast<std::size_t>(std::max(workers, 1))));
  parallel_for(chunks, workers, [&](std::size_t chunk) {
    Cache<T> c;
    for (std::size_t i = chunk * count / chunks; i < (chunk + 1) * count / chunks; ++i) {
      Impl::forward(*this, x + i * in, c, nullptr);
      std::copy(c.y.begin(), c.y.end(), out.begin() + static_cast<long>(i * P));
    }
  });
  return out;
}

template <typename T>
std::vector<T> Encoder<T>::attention_maps(const T* x) const {
  Cache<T> c;
  Impl::forward(*this, x, c, nullptr);
  std::vector<T> out;
  for (const auto& L : c.layers) out.insert(out.end(), L.p.begin(), L.p.end());
  return out;
}

template <typename T>
double Encoder<T>::loss_and_gradient(const T* x, const T* targets, std::size_t count, std::span<T> grad,
                                     double loss_scale, const DropoutContext* dropout, int workers) const {
  if (grad.size() != params_.size()) throw Error(ErrorKind::Contract, "gradient buffer has the wrong size");
  if (count == 0) return 0.0;
  const std::size_t in = static_cast<std::size_t>(config_.seq_len) * config_.input_dim;
  const int P = config_.output_dim;
  const double norm = loss_scale / (static_cast<double>(count) * P);
  const bool use_dropout = dropout != nullptr && config_.dropout > 0.0;

  // The partition is fixed so the reduction order, and with it the result,
  // does not depend on the worker count.
  const std::size_t chunks = std::min<std::size_t>(count, kGradientChunks);
  std::vector<std::vector<T>> local(chunks);
  std::vector<double> sums(chunks, 0.0);
  parallel_for(chunks, workers, [&](std::size_t chunk) {
    auto& g = local[chunk];
    g.assign(params_.size(), T(0));
    Cache<T> c;
    std::vector<T> dy(P);
    for (std::size_t i = chunk * count / chunks; i < (chunk + 1) * count / chunks; ++i) {
      std::optional<Rng> rng;
      if (use_dropout) rng.emplace(derive_seed(dropout->seed, dropout->first_sample + i));
      Impl::forward(*this, x + i * in, c, rng ? &*rng : nullptr);
      const T* t = targets + i * P;
      for (int j = 0; j < P; ++j) {
        const double r = static_cast<double>(c.y[j]) - t[j];
        sums[chunk] += r * r;
        dy[j] = static_cast<T>(2.0 * norm * r);
      }
      Impl::backward(*this, x + i * in, c, dy.data(), g.data());
    }
  });
  double total = 0.0;
  for (std::size_t k = 0; k < chunks; ++k) {
    total += sums[k];
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += local[k][i];
  }
  return total * norm;
}

template <typename T>
double Encoder<T>::loss(const T* x, const T* targets, std::size_t count, int workers) const {
  if (count == 0) return 0.0;
  const auto pred = predict_batch(x, count, workers);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = static_cast<double>(pred[i]) - targets[i];
    s += r * r;
  }
  return s / static_cast<double>(pred.size());
}

template class Encoder<float>;
template class Encoder<double>;

}  // namespace armid::nn
