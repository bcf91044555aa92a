#include "armid/pipeline/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "armid/core/error.hpp"
#include "json.hpp"

namespace armid::pipeline {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::Config, "config field '" + path + "': " + what);
}

// Walks one JSON object, remembering which keys were read so leftovers can be
// reported as unknown fields.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }
  ~Reader() = default;

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(child(key), "expected a number");
      out = v->get<double>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(child(key), "expected an integer");
      const auto x = v->get<std::int64_t>();
      if (x < INT32_MIN || x > INT32_MAX) fail(child(key), "out of range");
      out = static_cast<int>(x);
    }
  }

  void seed(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(child(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(child(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(child(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void interval(const std::string& key, model::Interval& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
        fail(child(key), "expected [min, max]");
      out.min = (*v)[0].get<double>();
      out.max = (*v)[1].get<double>();
    }
  }

  // A scalar applies to every joint; an array gives one value per joint.
  void per_joint(const std::string& key, dyn::VectorJ& out) {
    if (const json* v = find(key)) {
      if (v->is_number()) {
        out.setConstant(v->get<double>());
      } else if (v->is_array() && static_cast<int>(v->size()) == out.size()) {
        for (int j = 0; j < out.size(); ++j) {
          if (!(*v)[j].is_number()) fail(child(key), "expected numbers");
          out[j] = (*v)[j].get<double>();
        }
      } else {
        fail(child(key), "expected a number or " + std::to_string(out.size()) + " numbers");
      }
    }
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!seen_.count(it.key())) fail(child(it.key()), "unknown field");
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

data::DatasetConfig read_dataset(const json& node, const std::string& path, const data::DatasetConfig& base) {
  data::DatasetConfig d = base;
  Reader r(node, path);
  r.integer("seq_len", d.seq_len);
  r.integer("stride", d.stride);
  r.integer("ssr", d.ssr);
  r.boolean("include_torque", d.include_torque);
  r.boolean("include_jacobian", d.include_jacobian);
  std::string rows = d.jacobian_rows == data::JacobianRows::Full ? "full" : "linear_z";
  r.string("jacobian_rows", rows);
  if (rows == "linear_z") d.jacobian_rows = data::JacobianRows::LinearZ;
  else if (rows == "full") d.jacobian_rows = data::JacobianRows::Full;
  else fail(r.child("jacobian_rows"), "expected \"linear_z\" or \"full\"");
  r.number("resample_hz", d.resample_hz);
  r.number("train_fraction", d.train_fraction);
  r.seed("split_seed", d.split_seed);
  r.finish();
  try {
    d.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return d;
}

nn::EncoderConfig read_encoder(const json& node, const std::string& path) {
  nn::EncoderConfig e;
  Reader r(node, path);
  r.integer("d_model", e.d_model);
  r.integer("n_layers", e.n_layers);
  r.integer("n_heads", e.n_heads);
  r.integer("d_ff", e.d_ff);
  r.number("dropout", e.dropout);
  std::string pooling = "mean";
  r.string("pooling", pooling);
  if (pooling == "mean") e.pooling = nn::Pooling::Mean;
  else if (pooling == "last") e.pooling = nn::Pooling::Last;
  else fail(r.child("pooling"), "expected \"mean\" or \"last\"");
  r.boolean("positional_encoding", e.positional_encoding);
  r.boolean("grouped_input", e.grouped_input);
  r.finish();
  // Shapes come from the dataset; check the rest with placeholders.
  auto probe = e;
  probe.input_dim = probe.output_dim = 1;
  probe.grouped_input = false;
  try {
    probe.validate();
  } catch (const Error& ex) {
    fail(path, ex.what());
  }
  return e;
}

json interval_json(const model::Interval& i) { return json::array({i.min, i.max}); }

json vector_json(const dyn::VectorJ& v) {
  json a = json::array();
  for (int j = 0; j < v.size(); ++j) a.push_back(v[j]);
  return a;
}

}  // namespace

void PipelineConfig::validate() const {
  if (robots <= 0) fail("robots", "must be positive");
  if (waypoints <= 0) fail("waypoints", "must be positive");
  if (!(dt > 0.0)) fail("simulation.dt", "must be positive");
  if (datasets.empty()) fail("datasets", "grid must not be empty");
  if (encoders.empty()) fail("encoders", "grid must not be empty");
  if (workers < 0) fail("workers", "must be >= 0");
  try {
    ranges.validate();
  } catch (const Error& e) {
    fail("ranges", e.what());
  }
  try {
    gains.validate(6);
  } catch (const Error& e) {
    fail("pid", e.what());
  }
  try {
    training.validate();
  } catch (const Error& e) {
    fail("training", e.what());
  }
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    try {
      datasets[i].validate();
    } catch (const Error& e) {
      fail("datasets[" + std::to_string(i) + "]", e.what());
    }
  }
}

PipelineConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig c;
  Reader r(root, "");
  r.integer("robots", c.robots);
  r.seed("seed", c.seed);
  r.integer("waypoints", c.waypoints);
  r.integer("workers", c.workers);
  std::string output = c.output.string();
  r.string("output", output);
  c.output = output;

  if (const json* v = r.find("ranges")) {
    Reader rr(*v, "ranges");
    rr.interval("diameter", c.ranges.diameter);
    rr.interval("com_fraction", c.ranges.com_fraction);
    rr.interval("mu_c", c.ranges.mu_c);
    rr.interval("mu_v", c.ranges.mu_v);
    rr.interval("density", c.ranges.density);
    if (const json* s = rr.find("shapes")) {
      if (!s->is_array()) fail("ranges.shapes", "expected a list");
      c.ranges.shapes.clear();
      for (const auto& item : *s) {
        const std::string name = item.is_string() ? item.get<std::string>() : "";
        if (name == "cylinder") c.ranges.shapes.push_back(model::LinkShape::Cylinder);
        else if (name == "box") c.ranges.shapes.push_back(model::LinkShape::Box);
        else fail("ranges.shapes", "expected \"cylinder\" or \"box\"");
      }
    }
    rr.finish();
  }

  if (const json* v = r.find("pid")) {
    Reader rr(*v, "pid");
    rr.per_joint("kp", c.gains.kp);
    rr.per_joint("ki", c.gains.ki);
    rr.per_joint("kd", c.gains.kd);
    rr.number("kg", c.gains.kg);
    rr.number("integral_limit", c.gains.integral_limit);
    rr.number("torque_limit", c.gains.torque_limit);
    rr.boolean("signed_jacobian", c.gains.signed_jacobian);
    rr.finish();
  }

  if (const json* v = r.find("simulation")) {
    Reader rr(*v, "simulation");
    rr.number("dt", c.dt);
    rr.number("hold_tolerance", c.sampling.hold_tolerance);
    rr.number("settle_time", c.sampling.settle_time);
    rr.number("max_time", c.sampling.max_time);
    rr.number("joint_margin", c.sampling.joint_margin);
    rr.number("ground_clearance", c.sampling.collision.ground_clearance);
    rr.number("self_distance", c.sampling.collision.self_distance);
    rr.integer("interpolation_checks", c.sampling.interpolation_checks);
    rr.integer("retry_cap", c.sampling.retry_cap);
    rr.finish();
  }

  // Split settings are shared by every dataset cell.
  data::DatasetConfig split_base;
  if (const json* v = r.find("split")) {
    Reader rr(*v, "split");
    rr.number("train_fraction", split_base.train_fraction);
    rr.seed("seed", split_base.split_seed);
    rr.finish();
  }
  if (const json* v = r.find("datasets")) {
    if (!v->is_array() || v->empty()) fail("datasets", "expected a non-empty list");
    c.datasets.clear();
    for (std::size_t i = 0; i < v->size(); ++i)
      c.datasets.push_back(read_dataset((*v)[i], "datasets[" + std::to_string(i) + "]", split_base));
  } else {
    c.datasets = {split_base};
  }

  if (const json* v = r.find("encoders")) {
    if (!v->is_array() || v->empty()) fail("encoders", "expected a non-empty list");
    c.encoders.clear();
    for (std::size_t i = 0; i < v->size(); ++i)
      c.encoders.push_back(read_encoder((*v)[i], "encoders[" + std::to_string(i) + "]"));
  }

  if (const json* v = r.find("training")) {
    Reader rr(*v, "training");
    rr.number("learning_rate", c.training.learning_rate);
    rr.integer("batch_size", c.training.batch_size);
    rr.integer("epochs", c.training.epochs);
    rr.seed("seed", c.training.seed);
    rr.number("beta1", c.training.beta1);
    rr.number("beta2", c.training.beta2);
    rr.number("epsilon", c.training.epsilon);
    rr.number("clip_norm", c.training.clip_norm);
    rr.integer("patience", c.training.patience);
    rr.boolean("restore_best", c.training.restore_best);
    std::string precision = "float32";
    rr.string("precision", precision);
    if (precision == "float32") c.precision = Precision::Float32;
    else if (precision == "float64") c.precision = Precision::Float64;
    else fail("training.precision", "expected \"float32\" or \"float64\"");
    rr.finish();
  }

  if (const json* v = r.find("stages")) {
    Reader rr(*v, "stages");
    rr.boolean("generate", c.stages.generate);
    rr.boolean("simulate", c.stages.simulate);
    rr.boolean("sample", c.stages.sample);
    rr.boolean("train", c.stages.train);
    rr.boolean("evaluate", c.stages.evaluate);
    rr.boolean("report", c.stages.report);
    rr.finish();
  }
  r.finish();
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const PipelineConfig& c) {
  json root;
  root["robots"] = c.robots;
  root["seed"] = c.seed;
  root["waypoints"] = c.waypoints;
  root["workers"] = c.workers;
  root["output"] = c.output.string();
  json shapes = json::array();
  for (auto s : c.ranges.shapes) shapes.push_back(model::to_string(s));
  root["ranges"] = {{"diameter", interval_json(c.ranges.diameter)},
                    {"com_fraction", interval_json(c.ranges.com_fraction)},
                    {"mu_c", interval_json(c.ranges.mu_c)},
                    {"mu_v", interval_json(c.ranges.mu_v)},
                    {"density", interval_json(c.ranges.density)},
                    {"shapes", shapes}};
  root["pid"] = {{"kp", vector_json(c.gains.kp)},
                 {"ki", vector_json(c.gains.ki)},
                 {"kd", vector_json(c.gains.kd)},
                 {"kg", c.gains.kg},
                 {"integral_limit", c.gains.integral_limit},
                 {"torque_limit", c.gains.torque_limit},
                 {"signed_jacobian", c.gains.signed_jacobian}};
  root["simulation"] = {{"dt", c.dt},
                        {"hold_tolerance", c.sampling.hold_tolerance},
                        {"settle_time", c.sampling.settle_time},
                        {"max_time", c.sampling.max_time},
                        {"joint_margin", c.sampling.joint_margin},
                        {"ground_clearance", c.sampling.collision.ground_clearance},
                        {"self_distance", c.sampling.collision.self_distance},
                        {"interpolation_checks", c.sampling.interpolation_checks},
                        {"retry_cap", c.sampling.retry_cap}};
  root["split"] = {{"train_fraction", c.datasets.front().train_fraction},
                   {"seed", c.datasets.front().split_seed}};
  json datasets = json::array();
  for (const auto& d : c.datasets)
    datasets.push_back({{"seq_len", d.seq_len},
                        {"stride", d.stride},
                        {"ssr", d.ssr},
                        {"include_torque", d.include_torque},
                        {"include_jacobian", d.include_jacobian},
                        {"jacobian_rows", d.jacobian_rows == data::JacobianRows::Full ? "full" : "linear_z"},
                        {"resample_hz", d.resample_hz}});
  root["datasets"] = datasets;
  json encoders = json::array();
  for (const auto& e : c.encoders)
    encoders.push_back({{"d_model", e.d_model},
                        {"n_layers", e.n_layers},
                        {"n_heads", e.n_heads},
                        {"d_ff", e.d_ff},
                        {"dropout", e.dropout},
                        {"pooling", e.pooling == nn::Pooling::Last ? "last" : "mean"},
                        {"positional_encoding", e.positional_encoding},
                        {"grouped_input", e.grouped_input}});
  root["encoders"] = encoders;
  root["training"] = {{"learning_rate", c.training.learning_rate},
                      {"batch_size", c.training.batch_size},
                      {"epochs", c.training.epochs},
                      {"seed", c.training.seed},
                      {"beta1", c.training.beta1},
                      {"beta2", c.training.beta2},
                      {"epsilon", c.training.epsilon},
                      {"clip_norm", c.training.clip_norm},
                      {"patience", c.training.patience},
                      {"restore_best", c.training.restore_best},
                      {"precision", c.precision == Precision::Float64 ? "float64" : "float32"}};
  root["stages"] = {{"generate", c.stages.generate}, {"simulate", c.stages.simulate},
                    {"sample", c.stages.sample},     {"train", c.stages.train},
                    {"evaluate", c.stages.evaluate}, {"report", c.stages.report}};
  return root.dump(2);
}

void apply_env_overrides(PipelineConfig& config) {
  if (const char* out = std::getenv("ARMID_OUT"); out && *out) config.output = out;
  if (const char* w = std::getenv("ARMID_WORKERS"); w && *w) {
    char* end = nullptr;
    const long v = std::strtol(w, &end, 10);
    if (*end != '\0' || v < 0 || v > 4096) throw Error(ErrorKind::Config, "ARMID_WORKERS must be a non-negative integer");
    config.workers = static_cast<int>(v);
  }
}

PipelineConfig desk_preset() {
  PipelineConfig c;
  c.robots = 64;
  c.waypoints = 4;
  c.datasets = {data::DatasetConfig{}};
  c.encoders = {nn::EncoderConfig{}};
  c.output = "runs/desk";
  return c;
}

}  // namespace armid::pipeline
