#include "armid/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "armid/core/error.hpp"
#include "armid/core/hash.hpp"
#include "armid/core/parallel.hpp"
#include "armid/core/rng.hpp"
#include "armid/data/sampler.hpp"

namespace armid::data {

namespace {

constexpr char kMagic[8] = {'A', 'R', 'M', 'D', 'S', 'E', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
std::span<const std::byte> bytes_of(const std::vector<T>& v) {
  return std::as_bytes(std::span<const T>(v));
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <typename T>
  void pod(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  template <typename T>
  void vec(const std::vector<T>& v) {
    pod(static_cast<std::uint64_t>(v.size()));
    out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  template <typename T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    check();
    return v;
  }
  template <typename T>
  std::vector<T> vec() {
    const auto n = pod<std::uint64_t>();
    if (n > (std::uint64_t{1} << 36) / sizeof(T)) throw Error(ErrorKind::Io, "dataset cache: implausible array size");
    std::vector<T> v(n);
    in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    check();
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    std::string s(n, '\0');
    in_.read(s.data(), n);
    check();
    return s;
  }

 private:
  void check() {
    if (!in_) throw Error(ErrorKind::Io, "dataset cache: truncated file");
  }
  std::istream& in_;
};

void write_set(Writer& w, const SampleSet& s) {
  w.pod(static_cast<std::uint64_t>(s.count));
  w.vec(s.features);
  w.vec(s.targets);
  w.vec(s.robot_ids);
  w.vec(s.offsets);
  w.vec(s.windows);
}

SampleSet read_set(Reader& r) {
  SampleSet s;
  s.count = r.pod<std::uint64_t>();
  s.features = r.vec<double>();
  s.targets = r.vec<double>();
  s.robot_ids = r.vec<std::int64_t>();
  s.offsets = r.vec<std::int32_t>();
  s.windows = r.vec<std::int32_t>();
  return s;
}

void hash_config(ContentHash& h, const DatasetConfig& cfg) {
  h.add(cfg.seq_len).add(cfg.stride).add(cfg.ssr).add(cfg.include_torque).add(cfg.include_jacobian);
  h.add(static_cast<int>(cfg.jacobian_rows)).add(cfg.resample_hz).add(cfg.train_fraction).add(cfg.split_seed);
}

struct EpisodeSamples {
  std::vector<double> raw;  // windows x seq x raw cols
  std::vector<std::int32_t> offsets;
  std::vector<std::int32_t> windows;
  std::size_t count = 0;
};

}  // namespace

std::vector<std::int64_t> train_robot_ids(std::vector<std::int64_t> ids, const DatasetConfig& cfg) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  Rng rng(derive_seed(cfg.split_seed, 0x5e11));
  for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.index(i)]);
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(ids.size()) * cfg.train_fraction + 0.5));
  if (n_train == 0 || n_train >= ids.size())
    throw Error(ErrorKind::Config, "train/validation split leaves a split empty (" + std::to_string(ids.size()) +
                                       " robots, train fraction " + std::to_string(cfg.train_fraction) + ")");
  ids.resize(n_train);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::uint64_t dataset_key(std::span<const EpisodeInput> episodes, const Bounds& bounds, const DatasetConfig& cfg) {
  ContentHash h;
  h.add(std::string_view("armid-dataset"));
  h.add(static_cast<std::uint64_t>(kVersion)).add(model::kParamLayoutVersion);
  hash_config(h, cfg);
  const int dof = episodes.empty() || !episodes[0].log ? 0 : episodes[0].log->dof;
  for (const auto& name : feature_layout(cfg, dof)) h.add(std::string_view(name));
  for (const auto& b : bounds) h.add(b.min).add(b.max);
  for (const auto& ep : episodes) {
    h.add(ep.robot_id);
    for (double p : ep.params) h.add(p);
    if (ep.chain) {
      for (const auto& b : ep.chain->bodies) {
        h.add(b.mass).add(b.armature).add(b.mu_c).add(b.mu_v);
        for (int i = 0; i < 3; ++i) h.add(b.com[i]).add(b.origin_translation[i]).add(b.axis[i]).add(b.tip[i]);
        for (int i = 0; i < 9; ++i) h.add(b.inertia.data()[i]).add(b.origin_rotation.data()[i]);
      }
    }
    if (ep.log) {
      h.add(static_cast<int>(ep.log->status)).add(ep.log->dt);
      h.add(bytes_of(ep.log->time)).add(bytes_of(ep.log->q)).add(bytes_of(ep.log->qd)).add(bytes_of(ep.log->tau));
    }
  }
  return h.value();
}

Dataset build_dataset(std::span<const EpisodeInput> episodes, const Bounds& bounds, const DatasetConfig& cfg,
                      const BuildOptions& options) {
  cfg.validate();
  if (episodes.empty()) throw Error(ErrorKind::Config, "build_dataset: no episodes");
  const int dof = episodes[0].log ? episodes[0].log->dof : 0;
  for (const auto& ep : episodes) {
    if (!ep.chain || !ep.log) throw Error(ErrorKind::Contract, "build_dataset: episode without chain or log");
    if (ep.log->status != control::EpisodeStatus::Ok)
      throw Error(ErrorKind::Contract, "build_dataset: robot " + std::to_string(ep.robot_id) + " has a non-Ok log");
    if (ep.log->dof != dof || ep.chain->dof() != dof) throw Error(ErrorKind::Contract, "build_dataset: mixed dof");
  }

  const std::uint64_t key = dataset_key(episodes, bounds, cfg);
  std::filesystem::path cache_file;
  if (options.cache_dir) {
    cache_file = *options.cache_dir / ("dataset-" + to_hex(key) + ".bin");
    if (std::filesystem::exists(cache_file)) {
      Dataset cached = read_dataset(cache_file);
      if (cached.cache_key == key) {
        cached.from_cache = true;
        return cached;
      }
    }
  }

  std::vector<std::int64_t> ids;
  for (const auto& ep : episodes) ids.push_back(ep.robot_id);
  const auto train_ids = train_robot_ids(ids, cfg);
  const std::set<std::int64_t> train_set(train_ids.begin(), train_ids.end());

  const auto raw_names = feature_layout(cfg, dof);
  const int raw_cols = static_cast<int>(raw_names.size());

  std::vector<EpisodeSamples> per_episode(episodes.size());
  parallel_for(episodes.size(), options.workers, [&](std::size_t i) {
    const auto& ep = episodes[i];
    control::TrajectoryLog resampled;
    const control::TrajectoryLog* log = ep.log;
    if (cfg.resample_hz > 0.0) {
      resampled = resample_linear(*ep.log, cfg.resample_hz);
      log = &resampled;
    }
    auto& out = per_episode[i];
    for (const auto& win : offset_sample(*log, cfg)) {
      const auto rows = enrich_features(*ep.chain, *log, win.frames, cfg);
      out.raw.insert(out.raw.end(), rows.begin(), rows.end());
      out.offsets.push_back(win.offset);
      out.windows.push_back(win.index);
      ++out.count;
    }
  });

  std::vector<double> train_rows;
  for (std::size_t i = 0; i < episodes.size(); ++i)
    if (train_set.count(episodes[i].robot_id))
      train_rows.insert(train_rows.end(), per_episode[i].raw.begin(), per_episode[i].raw.end());
  if (train_rows.empty()) throw Error(ErrorKind::Config, "training split has no complete sequences");

  Dataset ds;
  ds.config = cfg;
  ds.seq_len = cfg.seq_len;
  ds.cache_key = key;
  ds.feature_mask = constant_feature_mask(train_rows, raw_cols, raw_names);
  for (int c = 0; c < raw_cols; ++c)
    if (ds.feature_mask.keep[c]) ds.feature_names.push_back(raw_names[c]);
  ds.feature_count = static_cast<int>(ds.feature_names.size());

  const auto kept_train = apply_mask(train_rows, raw_cols, ds.feature_mask);
  const std::size_t f = static_cast<std::size_t>(ds.feature_count);
  const std::size_t n_rows = kept_train.size() / f;
  ds.feature_mean.assign(f, 0.0);
  ds.feature_std.assign(f, 0.0);
  for (std::size_t r = 0; r < n_rows; ++r)
    for (std::size_t c = 0; c < f; ++c) ds.feature_mean[c] += kept_train[r * f + c];
  for (auto& m : ds.feature_mean) m /= static_cast<double>(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r)
    for (std::size_t c = 0; c < f; ++c) {
      const double d = kept_train[r * f + c] - ds.feature_mean[c];
      ds.feature_std[c] += d * d;
    }
  for (auto& s : ds.feature_std) s = std::sqrt(s / static_cast<double>(n_rows > 1 ? n_rows - 1 : 1));

  for (int k = 0; k < model::kParamCount; ++k)
    if (bounds[k].max != bounds[k].min) {
      ds.target_index.push_back(k);
      ds.target_bounds.push_back(bounds[k]);
    }
  ds.target_count = static_cast<int>(ds.target_index.size());
  if (ds.target_count == 0) throw Error(ErrorKind::DegenerateDataset, "every target has a degenerate range");

  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const auto& ep = episodes[i];
    auto& samples = per_episode[i];
    if (samples.count == 0) continue;
    SampleSet& set = train_set.count(ep.robot_id) ? ds.train : ds.val;
    auto kept = apply_mask(samples.raw, raw_cols, ds.feature_mask);
    for (std::size_t r = 0; r < kept.size() / f; ++r)
      for (std::size_t c = 0; c < f; ++c) kept[r * f + c] = (kept[r * f + c] - ds.feature_mean[c]) / ds.feature_std[c];
    set.features.insert(set.features.end(), kept.begin(), kept.end());
    const ParamVector pv = normalize_targets(ep.params, bounds);
    for (std::size_t w = 0; w < samples.count; ++w) {
      for (int k : ds.target_index) set.targets.push_back(pv.values[k]);
      set.robot_ids.push_back(ep.robot_id);
    }
    set.offsets.insert(set.offsets.end(), samples.offsets.begin(), samples.offsets.end());
    set.windows.insert(set.windows.end(), samples.windows.begin(), samples.windows.end());
    set.count += samples.count;
  }
  if (ds.val.count == 0) throw Error(ErrorKind::Config, "validation split has no complete sequences");

  if (options.cache_dir) {
    std::filesystem::create_directories(*options.cache_dir);
    write_dataset(cache_file, ds);
  }
  return ds;
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string());
    Writer w(out);
    out.write(kMagic, sizeof kMagic);
    w.pod(kVersion);
    w.pod(ds.cache_key);
    const auto& c = ds.config;
    w.pod(c.seq_len);
    w.pod(c.stride);
    w.pod(c.ssr);
    w.pod(static_cast<std::uint8_t>(c.include_torque));
    w.pod(static_cast<std::uint8_t>(c.include_jacobian));
    w.pod(static_cast<std::uint8_t>(c.jacobian_rows));
    w.pod(c.resample_hz);
    w.pod(c.train_fraction);
    w.pod(c.split_seed);
    w.pod(ds.seq_len);
    w.pod(ds.feature_count);
    w.pod(ds.target_count);
    w.pod(static_cast<std::uint32_t>(ds.feature_names.size()));
    for (const auto& n : ds.feature_names) w.str(n);
    std::vector<std::uint8_t> keep(ds.feature_mask.keep.begin(), ds.feature_mask.keep.end());
    w.vec(keep);
    w.pod(static_cast<std::uint32_t>(ds.feature_mask.notes.size()));
    for (const auto& n : ds.feature_mask.notes) w.str(n);
    w.vec(ds.feature_mean);
    w.vec(ds.feature_std);
    w.vec(ds.target_index);
    std::vector<double> tb;
    for (const auto& b : ds.target_bounds) {
      tb.push_back(b.min);
      tb.push_back(b.max);
    }
    w.vec(tb);
    write_set(w, ds.train);
    write_set(w, ds.val);
    if (!out) throw Error(ErrorKind::Io, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error(ErrorKind::Io, "not a dataset cache: " + path.string());
  Reader r(in);
  if (r.pod<std::uint32_t>() != kVersion) throw Error(ErrorKind::Io, "unsupported dataset cache version");
  Dataset ds;
  ds.cache_key = r.pod<std::uint64_t>();
  auto& c = ds.config;
  c.seq_len = r.pod<int>();
  c.stride = r.pod<int>();
  c.ssr = r.pod<int>();
  c.include_torque = r.pod<std::uint8_t>() != 0;
  c.include_jacobian = r.pod<std::uint8_t>() != 0;
  c.jacobian_rows = static_cast<JacobianRows>(r.pod<std::uint8_t>());
  c.resample_hz = r.pod<double>();
  c.train_fraction = r.pod<double>();
  c.split_seed = r.pod<std::uint64_t>();
  ds.seq_len = r.pod<int>();
  ds.feature_count = r.pod<int>();
  ds.target_count = r.pod<int>();
  const auto n_names = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_names; ++i) ds.feature_names.push_back(r.str());
  const auto keep = r.vec<std::uint8_t>();
  ds.feature_mask.keep.assign(keep.begin(), keep.end());
  const auto n_notes = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_notes; ++i) ds.feature_mask.notes.push_back(r.str());
  ds.feature_mean = r.vec<double>();
  ds.feature_std = r.vec<double>();
  ds.target_index = r.vec<int>();
  const auto tb = r.vec<double>();
  for (std::size_t i = 0; i + 1 < tb.size(); i += 2) ds.target_bounds.push_back({tb[i], tb[i + 1]});
  ds.train = read_set(r);
  ds.val = read_set(r);

  const std::size_t f = static_cast<std::size_t>(ds.feature_count);
  const std::size_t p = static_cast<std::size_t>(ds.target_count);
  const std::size_t s = static_cast<std::size_t>(ds.seq_len);
  for (const SampleSet* set : {&ds.train, &ds.val})
    if (set->features.size() != set->count * s * f || set->targets.size() != set->count * p ||
        set->robot_ids.size() != set->count || ds.feature_names.size() != f || ds.target_index.size() != p)
      throw Error(ErrorKind::Io, "dataset cache: inconsistent sizes");
  return ds;
}

}  // namespace armid::data
