#include "armid/pipeline/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "armid/core/error.hpp"
#include "armid/model/params.hpp"
#include "json.hpp"
#include "json_io.hpp"

namespace armid::pipeline {

using nlohmann::json;

namespace {

using Row = std::vector<std::string>;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string render(const Row& header, const std::vector<Row>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
  auto line = [&](const Row& r) {
    std::string out;
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string& cell = c < r.size() ? r[c] : std::string();
      if (c) out += "  ";
      out += std::string(width[c] - cell.size(), ' ') + cell;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string r2_cell(const std::optional<double>& v) { return v ? fixed(*v, 4) : "n/a"; }

// Layout index of a parameter, or -1 when the layout has no such entry.
int layout_index(model::ParamGroup group, int index, int axis = -1) {
  const auto& layout = model::param_layout();
  for (std::size_t i = 0; i < layout.size(); ++i)
    if (layout[i].group == group && layout[i].index == index && layout[i].axis == axis) return static_cast<int>(i);
  return -1;
}

// Two cells (R², RMSE) for one parameter.
void metric_cells(Row& row, const CellResult* cell, int index) {
  if (index < 0) {
    row.insert(row.end(), {"-", "-"});
    return;
  }
  const nn::TargetMetric* t = cell && cell->val ? cell->val->find(index) : nullptr;
  if (!t) {
    row.insert(row.end(), {"n/a", "n/a"});
    return;
  }
  row.push_back(r2_cell(t->r2));
  row.push_back(fixed(t->rmse, 4));
}

const CellResult* cell_or_null(const RunReport& report) {
  const int b = best_cell(report);
  return b < 0 ? nullptr : &report.cells[b];
}

}  // namespace

int best_cell(const RunReport& report) {
  int best = -1;
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    const auto& c = report.cells[i];
    if (!c.val || !c.val->mean_r2) continue;
    if (best < 0 || *c.val->mean_r2 > *report.cells[best].val->mean_r2) best = static_cast<int>(i);
  }
  if (best < 0 && !report.cells.empty()) best = 0;
  return best;
}

std::string dataset_table(const RunReport& report) {
  std::vector<Row> rows;
  for (const auto& c : report.cells) {
    Row r{std::to_string(c.dataset.seq_len), std::to_string(c.dataset.stride), std::to_string(c.dataset.ssr),
          fixed(c.effective_time, 3), fixed(100.0 * c.utilization, 2) + "%"};
    r.push_back(c.val ? r2_cell(c.val->mean_r2) : "n/a");
    r.push_back(c.val ? fixed(c.val->mean_rmse, 4) : "n/a");
    r.push_back(std::to_string(c.encoder.n_layers) + "/" + std::to_string(c.encoder.n_heads) + "/" +
                std::to_string(c.encoder.d_model));
    rows.push_back(std::move(r));
  }
  return render({"Seq Len", "Stride", "SSR", "Effective Time (s)", "Utilization", "Val R2", "Val RMSE",
                 "Arch (L/H/D)"},
                rows);
}

std::string architecture_table(const RunReport& report) {
  std::vector<Row> rows;
  for (const auto& c : report.cells) {
    Row r{std::to_string(c.encoder.n_layers), std::to_string(c.encoder.n_heads), std::to_string(c.encoder.d_model)};
    r.push_back(c.val ? r2_cell(c.val->mean_r2) : "n/a");
    r.push_back(c.val ? fixed(c.val->mean_rmse, 4) : "n/a");
    r.push_back(std::to_string(c.dataset.seq_len) + "/" + std::to_string(c.dataset.stride) + "/" +
                std::to_string(c.dataset.ssr));
    rows.push_back(std::move(r));
  }
  return render({"Layers", "Heads", "Embedding Dim", "Val R2", "Val RMSE", "Data (seq/stride/ssr)"}, rows);
}

std::string friction_table(const CellResult& cell) {
  std::vector<Row> rows;
  for (int j = 0; j < 6; ++j) {
    Row r{"J" + std::to_string(j)};
    metric_cells(r, &cell, layout_index(model::ParamGroup::Coulomb, j));
    metric_cells(r, &cell, layout_index(model::ParamGroup::Viscous, j));
    rows.push_back(std::move(r));
  }
  return render({"Joint", "Coulomb R2", "Coulomb RMSE", "Viscous R2", "Viscous RMSE"}, rows);
}

std::string mass_com_table(const CellResult& cell) {
  std::vector<Row> rows;
  for (int l = 2; l <= 6; ++l) {
    Row r{"L" + std::to_string(l)};
    metric_cells(r, &cell, layout_index(model::ParamGroup::Mass, l));
    metric_cells(r, &cell, layout_index(model::ParamGroup::Com, l));
    rows.push_back(std::move(r));
  }
  return render({"Link", "Mass R2", "Mass RMSE", "COM R2", "COM RMSE"}, rows);
}

std::string inertia_table(const CellResult& cell) {
  std::vector<Row> rows;
  for (int l = 1; l <= 6; ++l) {
    Row r{"L" + std::to_string(l)};
    for (int axis = 0; axis < 3; ++axis) metric_cells(r, &cell, layout_index(model::ParamGroup::Inertia, l, axis));
    rows.push_back(std::move(r));
  }
  return render({"Link", "Ixx R2", "Ixx RMSE", "Iyy R2", "Iyy RMSE", "Izz R2", "Izz RMSE"}, rows);
}

std::string report_to_json(const RunReport& report) {
  json j;
  j["config_hash"] = report.config_hash;
  j["robots"] = report.robots;
  j["episode_status"] = report.episode_status;
  json stages = json::array();
  for (const auto& s : report.stages)
    stages.push_back({{"stage", to_string(s.stage)},
                      {"seconds", s.seconds},
                      {"computed", s.computed},
                      {"cached", s.cached}});
  j["stages"] = stages;
  json cells = json::array();
  for (const auto& c : report.cells) {
    json cell = {{"seq_len", c.dataset.seq_len},
                 {"stride", c.dataset.stride},
                 {"ssr", c.dataset.ssr},
                 {"n_layers", c.encoder.n_layers},
                 {"n_heads", c.encoder.n_heads},
                 {"d_model", c.encoder.d_model},
                 {"d_ff", c.encoder.d_ff},
                 {"dataset_key", c.dataset_key},
                 {"model_key", c.model_key},
                 {"effective_time", c.effective_time},
                 {"utilization", c.utilization},
                 {"train_samples", c.train_samples},
                 {"val_samples", c.val_samples},
                 {"features", c.features},
                 {"targets", c.targets},
                 {"epochs_run", c.epochs_run},
                 {"best_epoch", c.best_epoch}};
    cell["val"] = c.val ? detail::metrics_json(*c.val) : json(nullptr);
    cell["train"] = c.train ? detail::metrics_json(*c.train) : json(nullptr);
    cells.push_back(std::move(cell));
  }
  j["cells"] = cells;
  if (report.failure)
    j["failure"] = {{"stage", to_string(report.failure->stage)},
                    {"kind", report.failure->kind},
                    {"message", report.failure->message}};
  return j.dump(2);
}

void emit_tables(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const CellResult empty;
  const CellResult* best = cell_or_null(report);
  const CellResult& cell = best ? *best : empty;
  const std::pair<const char*, std::string> files[] = {
      {"table_dataset.txt", dataset_table(report)},
      {"table_architecture.txt", architecture_table(report)},
      {"table_friction.txt", friction_table(cell)},
      {"table_mass_com.txt", mass_com_table(cell)},
      {"table_inertia.txt", inertia_table(cell)},
      {"report.json", report_to_json(report)},
  };
  for (const auto& [name, text] : files) {
    const auto path = dir / name;
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
      out << text;
      if (!out) throw Error(ErrorKind::Io, "write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  }
}

}  // namespace armid::pipeline
