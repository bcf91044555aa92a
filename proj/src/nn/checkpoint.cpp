#include "armid/nn/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "armid/core/error.hpp"

namespace armid::nn {

static_assert(std::endian::native == std::endian::little, "checkpoints are little-endian");

namespace {

constexpr char kMagic[8] = {'A', 'R', 'M', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename V>
void put(std::ostream& out, const V& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V get(std::istream& in) {
  V v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(V));
  if (!in) throw Error(ErrorKind::Io, "truncated checkpoint");
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  if (n > 4096) throw Error(ErrorKind::Io, "corrupt checkpoint string");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw Error(ErrorKind::Io, "truncated checkpoint");
  return s;
}

template <typename S>
std::vector<S> read_weights(std::istream& in, std::size_t n) {
  std::vector<S> w(n);
  in.read(reinterpret_cast<char*>(w.data()), static_cast<std::streamsize>(n * sizeof(S)));
  if (!in) throw Error(ErrorKind::Io, "truncated checkpoint weights");
  return w;
}

}  // namespace

template <typename T>
void write_checkpoint(const std::filesystem::path& path, const Encoder<T>& model) {
  const auto& c = model.config();
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    put(out, kVersion);
    for (int v : {c.d_model, c.n_layers, c.n_heads, c.d_ff, c.seq_len, c.input_dim, c.output_dim})
      put(out, static_cast<std::int32_t>(v));
    put(out, c.dropout);
    put(out, static_cast<std::uint8_t>(c.pooling));
    put(out, static_cast<std::uint8_t>(c.positional_encoding));
    put(out, static_cast<std::uint8_t>(c.grouped_input));
    put(out, static_cast<std::uint32_t>(c.feature_groups.size()));
    for (int g : c.feature_groups) put(out, static_cast<std::int32_t>(g));
    put(out, static_cast<std::uint8_t>(sizeof(T)));
    put(out, static_cast<std::uint32_t>(model.tensors().size()));
    for (const auto& t : model.tensors()) {
      put_string(out, t.name);
      put(out, static_cast<std::int32_t>(t.rows));
      put(out, static_cast<std::int32_t>(t.cols));
    }
    const auto p = model.params();
    out.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(p.size() * sizeof(T)));
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

template <typename T>
Encoder<T> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw Error(ErrorKind::Io, "not a checkpoint: " + path.string());
  if (get<std::uint32_t>(in) != kVersion) throw Error(ErrorKind::Io, "unsupported checkpoint version");

  EncoderConfig c;
  for (int* f : {&c.d_model, &c.n_layers, &c.n_heads, &c.d_ff, &c.seq_len, &c.input_dim, &c.output_dim})
    *f = get<std::int32_t>(in);
  c.dropout = get<double>(in);
  c.pooling = static_cast<Pooling>(get<std::uint8_t>(in));
  c.positional_encoding = get<std::uint8_t>(in) != 0;
  c.grouped_input = get<std::uint8_t>(in) != 0;
  const auto n_groups = get<std::uint32_t>(in);
  if (n_groups > 100000) throw Error(ErrorKind::Io, "corrupt checkpoint group table");
  for (std::uint32_t i = 0; i < n_groups; ++i) c.feature_groups.push_back(get<std::int32_t>(in));
  const auto width = get<std::uint8_t>(in);
  if (width != 4 && width != 8) throw Error(ErrorKind::Io, "unknown checkpoint element width");

  Encoder<T> model(c, 0);
  const auto n_tensors = get<std::uint32_t>(in);
  if (n_tensors != model.tensors().size()) throw Error(ErrorKind::Config, "checkpoint manifest does not match config");
  for (const auto& t : model.tensors()) {
    const auto name = get_string(in);
    const auto rows = get<std::int32_t>(in);
    const auto cols = get<std::int32_t>(in);
    if (name != t.name || rows != t.rows || cols != t.cols)
      throw Error(ErrorKind::Config, "checkpoint tensor " + name + " does not match config");
  }
  auto p = model.params();
  if (width == sizeof(T)) {
    const auto w = read_weights<T>(in, p.size());
    std::copy(w.begin(), w.end(), p.begin());
  } else if (width == 4) {
    const auto w = read_weights<float>(in, p.size());
    std::transform(w.begin(), w.end(), p.begin(), [](float v) { return static_cast<T>(v); });
  } else {
    const auto w = read_weights<double>(in, p.size());
    std::transform(w.begin(), w.end(), p.begin(), [](double v) { return static_cast<T>(v); });
  }
  in.peek();
  if (!in.eof()) throw Error(ErrorKind::Io, "trailing bytes in checkpoint");
  return model;
}

template void write_checkpoint<float>(const std::filesystem::path&, const Encoder<float>&);
template void write_checkpoint<double>(const std::filesystem::path&, const Encoder<double>&);
template Encoder<float> read_checkpoint<float>(const std::filesystem::path&);
template Encoder<double> read_checkpoint<double>(const std::filesystem::path&);

}  // namespace armid::nn
