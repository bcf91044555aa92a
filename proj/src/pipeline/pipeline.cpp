#include "armid/pipeline/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>

#include "armid/control/simulate.hpp"
#include "armid/control/waypoints.hpp"
#include "armid/core/error.hpp"
#include "armid/core/hash.hpp"
#include "armid/core/parallel.hpp"
#include "armid/core/rng.hpp"
#include "armid/data/dataset.hpp"
#include "armid/data/sampler.hpp"
#include "armid/dyn/chain.hpp"
#include "armid/model/generator.hpp"
#include "armid/model/manifest.hpp"
#include "armid/model/params.hpp"
#include "armid/model/urdf.hpp"
#include "armid/nn/checkpoint.hpp"
#include "armid/nn/train.hpp"
#include "armid/pipeline/report.hpp"
#include "json.hpp"
#include "json_io.hpp"

namespace armid::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;
using detail::metrics_json;
using detail::metrics_from_json;

const char* to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::Generate: return "generate";
    case Stage::Simulate: return "simulate";
    case Stage::Sample: return "sample";
    case Stage::Train: return "train";
    case Stage::Evaluate: return "evaluate";
    case Stage::Report: return "report";
  }
  return "unknown";
}

fs::path report_path(const PipelineConfig& config) { return config.output / "report" / "report.json"; }

namespace {

// Bumped whenever a stage's output format or semantics change.
constexpr int kStageFormat = 1;

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, "corrupt " + path.string() + ": " + e.what());
  }
}

std::string robot_file(std::int64_t id, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "robot_%06lld.%s", static_cast<long long>(id), ext);
  return buf;
}

class Runner {
 public:
  Runner(const PipelineConfig& config, const RunOptions& options)
      : cfg_(config),
        opts_(options),
        workers_(config.workers > 0 ? config.workers : default_workers()),
        tmpl_(model::KinematicTemplate::anthropomorphic()) {
    report_.config_hash = ContentHash().add(config_to_json(without_runtime(cfg_))).hex();
    report_.robots = cfg_.robots;
  }

  RunReport run(Stage last) {
    cfg_.validate();
    fs::create_directories(cfg_.output);
    write_text(cfg_.output / "config.json", config_to_json(cfg_));
    const Stage order[] = {Stage::Generate, Stage::Simulate, Stage::Sample, Stage::Train, Stage::Evaluate, Stage::Report};
    for (Stage s : order) {
      if (static_cast<int>(s) > static_cast<int>(last)) break;
      if (s == Stage::Report && !cfg_.stages.report) continue;
      const auto t0 = std::chrono::steady_clock::now();
      StageRecord rec;
      rec.stage = s;
      try {
        run_stage(s, rec);
      } catch (const Error& e) {
        report_.failure = FailureRecord{s, std::string(armid::to_string(e.kind())), e.what()};
        write_text(report_path(cfg_), report_to_json(report_));
        throw;
      }
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      report_.stages.push_back(rec);
      log() << "[" << to_string(s) << "] computed=" << rec.computed << " cached=" << rec.cached << " ("
            << rec.seconds << " s)\n";
    }
    return report_;
  }

 private:
  static PipelineConfig without_runtime(PipelineConfig c) {
    c.workers = 0;
    c.output.clear();
    c.stages = {};
    return c;
  }

  std::ostream& log() {
    static std::ostringstream sink;
    sink.str("");
    return opts_.log ? *opts_.log : sink;
  }

  void run_stage(Stage s, StageRecord& rec) {
    switch (s) {
      case Stage::Generate: generate(rec); break;
      case Stage::Simulate: simulate(rec); break;
      case Stage::Sample: sample(rec); break;
      case Stage::Train: train(rec); break;
      case Stage::Evaluate: evaluate(rec); break;
      case Stage::Report: emit(rec); break;
    }
  }

  // Robots are regenerated from their seeds on every run; the manifest and
  // URDF files are the stage's persistent output.
  void generate(StageRecord& rec) {
    ContentHash h;
    h.add("generate").add(kStageFormat).add(cfg_.robots).add(cfg_.seed).add(model::kParamLayoutVersion);
    const auto ranges_json = config_to_json(range_only(cfg_));
    h.add(ranges_json);
    gen_key_ = h.hex();
    robots_.clear();
    for (int id = 0; id < cfg_.robots; ++id)
      robots_.push_back(model::generate_robot(derive_seed(cfg_.seed, static_cast<std::uint64_t>(id)), tmpl_,
                                              cfg_.ranges, id));
    const fs::path dir = cfg_.output / "robots" / gen_key_;
    const fs::path manifest = dir / "manifest.jsonl";
    if (fs::exists(manifest)) {
      rec.cached = robots_.size();
      return;
    }
    if (!cfg_.stages.generate) throw Error(ErrorKind::Config, "generate stage disabled and no cached robots");
    fs::create_directories(dir);
    std::vector<model::ManifestRecord> records;
    for (const auto& r : robots_) {
      write_text(dir / robot_file(r.id, "urdf"), model::serialize_urdf(r));
      auto m = model::make_record(r);
      m.seed = derive_seed(cfg_.seed, static_cast<std::uint64_t>(r.id));
      records.push_back(m);
    }
    model::write_manifest(manifest, records);
    rec.computed = robots_.size();
  }

  static PipelineConfig range_only(const PipelineConfig& c) {
    PipelineConfig r;
    r.ranges = c.ranges;
    return r;
  }

  void simulate(StageRecord& rec) {
    ContentHash h;
    h.add("simulate").add(kStageFormat).add(gen_key_).add(cfg_.waypoints).add(cfg_.dt);
    PipelineConfig sim_part;
    sim_part.gains = cfg_.gains;
    sim_part.sampling = cfg_.sampling;
    h.add(config_to_json(sim_part));
    sim_key_ = h.hex();
    const fs::path dir = cfg_.output / "trajectories" / sim_key_;
    fs::create_directories(dir);

    chains_.clear();
    for (const auto& r : robots_) chains_.push_back(dyn::make_chain(r));
    logs_.assign(robots_.size(), {});
    std::vector<char> computed(robots_.size(), 0);
    parallel_for(robots_.size(), workers_, [&](std::size_t i) {
      const auto path = dir / robot_file(robots_[i].id, "traj");
      if (fs::exists(path)) {
        logs_[i] = control::read_trajectory(path);
        return;
      }
      if (!cfg_.stages.simulate) throw Error(ErrorKind::Config, "simulate stage disabled and no cached trajectory");
      const auto& chain = chains_[i];
      control::SimulationOptions so;
      so.dt = cfg_.dt;
      so.start.q = dyn::VectorJ::Zero(chain.dof());
      so.start.qd = dyn::VectorJ::Zero(chain.dof());
      const auto seed = derive_seed(derive_seed(cfg_.seed, static_cast<std::uint64_t>(robots_[i].id)), 0x3a7);
      std::vector<control::Waypoint> wps;
      try {
        wps = control::sample_waypoints(chain, cfg_.waypoints, seed, so.start.q, cfg_.sampling);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InfeasibleWorkspace) throw;
      }
      control::TrajectoryLog log;
      if (wps.empty()) {
        log.robot_id = robots_[i].id;
        log.dt = cfg_.dt;
        log.dof = chain.dof();
        log.status = control::EpisodeStatus::Timeout;
      } else {
        log = control::simulate_trajectory(chain, wps, cfg_.gains, so, robots_[i].id);
      }
      control::write_trajectory(path, log);
      logs_[i] = std::move(log);
      computed[i] = 1;
    });
    std::string summary;
    report_.episode_status.clear();
    for (std::size_t i = 0; i < logs_.size(); ++i) {
      summary += control::summary_line(logs_[i]) + "\n";
      ++report_.episode_status[control::to_string(logs_[i].status)];
      if (computed[i]) ++rec.computed;
      else ++rec.cached;
    }
    write_text(dir / "summary.txt", summary);
  }

  void sample(StageRecord& rec) {
    // Targets come from the generation manifest, keyed by robot id.
    const auto manifest = model::read_manifest(cfg_.output / "robots" / gen_key_ / "manifest.jsonl");
    std::map<std::int64_t, model::RawParams> params;
    for (const auto& m : manifest) params[m.id] = m.params;
    std::vector<data::EpisodeInput> episodes;
    for (std::size_t i = 0; i < robots_.size(); ++i) {
      if (logs_[i].status != control::EpisodeStatus::Ok) continue;
      const auto it = params.find(robots_[i].id);
      if (it == params.end()) throw Error(ErrorKind::Io, "robot missing from manifest");
      episodes.push_back({robots_[i].id, &chains_[i], &logs_[i], it->second});
    }
    if (episodes.size() < 2) throw Error(ErrorKind::DegenerateDataset, "fewer than two usable episodes");
    const auto bounds = model::param_bounds(cfg_.ranges, tmpl_);
    data::BuildOptions bo;
    bo.cache_dir = cfg_.output / "datasets";
    bo.workers = workers_;
    datasets_.clear();
    for (const auto& dc : cfg_.datasets) {
      if (!cfg_.stages.sample) {
        const auto key = data::dataset_key(episodes, bounds, dc);
        const auto path = *bo.cache_dir / ("dataset-" + to_hex(key) + ".bin");
        if (!fs::exists(path)) throw Error(ErrorKind::Config, "sample stage disabled and no cached dataset");
      }
      datasets_.push_back(data::build_dataset(episodes, bounds, dc, bo));
      if (datasets_.back().from_cache) ++rec.cached;
      else ++rec.computed;
    }
  }

  std::string model_key(const data::Dataset& ds, const nn::EncoderConfig& enc) const {
    PipelineConfig part;
    part.encoders = {enc};
    part.training = cfg_.training;
    part.precision = cfg_.precision;
    return ContentHash()
        .add("train")
        .add(kStageFormat)
        .add(ds.cache_key)
        .add(config_to_json(part))
        .hex();
  }

  template <typename T>
  void train_cell(const data::Dataset& ds, const nn::EncoderConfig& base, const fs::path& ckpt,
                  const fs::path& history_path) {
    const auto enc_cfg = nn::encoder_config_for(ds, base);
    nn::Encoder<T> model(enc_cfg, derive_seed(cfg_.training.seed, 0xe4c));
    nn::TrainOptions to;
    to.workers = workers_;
    const auto history = nn::train(model, ds, cfg_.training, to);
    json h;
    h["best_epoch"] = history.best_epoch;
    h["early_stopped"] = history.early_stopped;
    json epochs = json::array();
    for (const auto& e : history.epochs)
      epochs.push_back({{"epoch", e.epoch},
                        {"train_loss", e.train_loss},
                        {"val_loss", e.val_loss},
                        {"val_mean_r2", e.val_mean_r2 ? json(*e.val_mean_r2) : json(nullptr)}});
    h["epochs"] = epochs;
    nn::write_checkpoint(ckpt, model);
    write_text(history_path, h.dump(2));
  }

  void train(StageRecord& rec) {
    cells_.clear();
    report_.cells.clear();
    for (std::size_t d = 0; d < datasets_.size(); ++d) {
      for (const auto& enc : cfg_.encoders) {
        const auto& ds = datasets_[d];
        CellResult cell;
        cell.dataset = ds.config;
        cell.encoder = enc;
        cell.dataset_key = to_hex(ds.cache_key);
        cell.model_key = model_key(ds, enc);
        cell.effective_time = data::effective_time(ds.config.seq_len, ds.config.stride);
        cell.utilization = data::utilization(ds.config.stride, ds.config.ssr);
        cell.train_samples = ds.train.count;
        cell.val_samples = ds.val.count;
        cell.features = ds.feature_count;
        cell.targets = ds.target_count;
        const fs::path ckpt = cfg_.output / "models" / (cell.model_key + ".ckpt");
        const fs::path hist = cfg_.output / "models" / (cell.model_key + ".history.json");
        if (fs::exists(ckpt) && fs::exists(hist)) {
          ++rec.cached;
        } else {
          if (!cfg_.stages.train) throw Error(ErrorKind::Config, "train stage disabled and no cached model");
          fs::create_directories(ckpt.parent_path());
          log() << "[train] cell " << cell.model_key << " (seq " << ds.config.seq_len << ", stride "
                << ds.config.stride << ", ssr " << ds.config.ssr << ", layers " << enc.n_layers << ", heads "
                << enc.n_heads << ", d_model " << enc.d_model << ") samples=" << ds.train.count << "/"
                << ds.val.count << "\n";
          if (cfg_.precision == Precision::Float64) train_cell<double>(ds, enc, ckpt, hist);
          else train_cell<float>(ds, enc, ckpt, hist);
          ++rec.computed;
        }
        const auto h = read_json(hist);
        cell.best_epoch = h.at("best_epoch").get<int>();
        cell.epochs_run = static_cast<int>(h.at("epochs").size());
        cells_.push_back(d);
        report_.cells.push_back(std::move(cell));
      }
    }
  }

  template <typename T>
  void evaluate_cell(CellResult& cell, const data::Dataset& ds) {
    const auto model = nn::read_checkpoint<T>(cfg_.output / "models" / (cell.model_key + ".ckpt"));
    cell.val = nn::evaluate(model, ds.val, ds.target_index, workers_);
    cell.train = nn::evaluate(model, ds.train, ds.target_index, workers_);
  }

  void evaluate(StageRecord& rec) {
    for (std::size_t c = 0; c < report_.cells.size(); ++c) {
      auto& cell = report_.cells[c];
      const fs::path path = cfg_.output / "metrics" / (cell.model_key + ".json");
      if (fs::exists(path)) {
        const auto j = read_json(path);
        cell.val = metrics_from_json(j.at("val"));
        cell.train = metrics_from_json(j.at("train"));
        ++rec.cached;
        continue;
      }
      if (!cfg_.stages.evaluate) throw Error(ErrorKind::Config, "evaluate stage disabled and no cached metrics");
      const auto& ds = datasets_[cells_[c]];
      if (cfg_.precision == Precision::Float64) evaluate_cell<double>(cell, ds);
      else evaluate_cell<float>(cell, ds);
      write_text(path, json{{"val", metrics_json(*cell.val)}, {"train", metrics_json(*cell.train)}}.dump(2));
      ++rec.computed;
    }
  }

  void emit(StageRecord& rec) {
    // Stage timings of this invocation are included up to the report stage.
    emit_tables(report_, cfg_.output / "report");
    rec.computed = 1;
  }

  PipelineConfig cfg_;
  RunOptions opts_;
  int workers_;
  model::KinematicTemplate tmpl_;
  RunReport report_;
  std::string gen_key_, sim_key_;
  std::vector<model::RobotModel> robots_;
  std::vector<dyn::Chain> chains_;
  std::vector<control::TrajectoryLog> logs_;
  std::vector<data::Dataset> datasets_;
  std::vector<std::size_t> cells_;  // dataset index of each report cell
};

}  // namespace

RunReport run_pipeline(const PipelineConfig& config, Stage last, const RunOptions& options) {
  Runner runner(config, options);
  return runner.run(last);
}

}  // namespace armid::pipeline
