// armid: command-line driver for the generate -> simulate -> sample -> train
// -> evaluate -> report pipeline.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "armid/core/error.hpp"
#include "armid/pipeline/config.hpp"
#include "armid/pipeline/pipeline.hpp"
#include "armid/pipeline/report.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool resume = false;
  bool quiet = false;
};

armid::pipeline::PipelineConfig resolve(const Flags& f) {
  using namespace armid::pipeline;
  PipelineConfig cfg;
  if (f.resume) {
    // Reuse the resolved config saved by the interrupted run.
    std::filesystem::path dir = f.out;
    if (dir.empty()) {
      PipelineConfig probe = f.config.empty() ? desk_preset() : load_config(f.config);
      apply_env_overrides(probe);
      dir = probe.output;
    }
    const auto saved = dir / "config.json";
    if (!std::filesystem::exists(saved))
      throw armid::Error(armid::ErrorKind::Config, "--resume: no saved config at " + saved.string());
    cfg = load_config(saved);
  } else {
    cfg = f.config.empty() ? desk_preset() : load_config(f.config);
  }
  apply_env_overrides(cfg);
  if (!f.out.empty()) cfg.output = f.out;
  if (f.seed) cfg.seed = *f.seed;
  if (f.workers) cfg.workers = *f.workers;
  cfg.validate();
  return cfg;
}

int run(armid::pipeline::Stage last, const Flags& f) {
  using namespace armid::pipeline;
  const auto cfg = resolve(f);
  RunOptions opts;
  opts.log = f.quiet ? nullptr : &std::cerr;
  const auto report = run_pipeline(cfg, last, opts);
  if (last == Stage::Report) {
    std::cout << "Dataset configurations\n" << dataset_table(report) << "\n";
    std::cout << "Architectures\n" << architecture_table(report) << "\n";
    const int b = best_cell(report);
    if (b >= 0) {
      const auto& cell = report.cells[b];
      std::cout << "Friction (best cell " << cell.model_key << ")\n" << friction_table(cell) << "\n";
      std::cout << "Mass and COM\n" << mass_com_table(cell) << "\n";
      std::cout << "Inertia\n" << inertia_table(cell) << "\n";
    }
    std::cout << "report: " << report_path(cfg).string() << "\n";
  } else {
    for (const auto& [status, n] : report.episode_status) std::cout << "episodes " << status << ": " << n << "\n";
    for (const auto& c : report.cells)
      std::cout << "cell " << c.model_key << ": train=" << c.train_samples << " val=" << c.val_samples
                << (c.val && c.val->mean_r2 ? " val_r2=" + std::to_string(*c.val->mean_r2) : std::string()) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using armid::pipeline::Stage;
  CLI::App app{"Synthetic manipulator dataset and transformer parameter estimator"};
  app.require_subcommand(1);
  Flags flags;
  const std::pair<const char*, Stage> verbs[] = {
      {"generate", Stage::Generate}, {"simulate", Stage::Simulate}, {"sample", Stage::Sample},
      {"train", Stage::Train},       {"evaluate", Stage::Evaluate}, {"report", Stage::Report},
      {"all", Stage::Report},
  };
  const char* help[] = {"Generate robot models", "Simulate PID trajectories", "Build the windowed dataset",
                        "Train the estimator grid", "Evaluate trained models", "Write and print the report tables",
                        "Run every stage"};
  std::optional<Stage> chosen;
  for (std::size_t i = 0; i < std::size(verbs); ++i) {
    auto* sub = app.add_subcommand(verbs[i].first, help[i]);
    sub->add_option("--config", flags.config, "JSON config file (default: desk preset)");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--seed", flags.seed, "Robot generation seed");
    sub->add_option("--workers", flags.workers, "Worker threads")->check(CLI::NonNegativeNumber);
    sub->add_flag("--resume", flags.resume, "Continue the run saved in the output directory");
    sub->add_flag("-q,--quiet", flags.quiet, "No progress lines");
    const Stage stage = verbs[i].second;
    sub->callback([&chosen, stage] { chosen = stage; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    return run(*chosen, flags);
  } catch (const armid::Error& e) {
    std::cerr << "armid: error [" << armid::to_string(e.kind()) << "]: " << e.what() << "\n";
    return e.kind() == armid::ErrorKind::Config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "armid: error [internal]: " << e.what() << "\n";
    return 3;
  }
}
