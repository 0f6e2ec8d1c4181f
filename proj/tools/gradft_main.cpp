// gradft: gradual fine-tuning experiment driver.
//
// Subcommands:
//   gen       write a synthetic task's datasets to disk
//   run       execute an experiment config (comparison matrix over regimes/seeds)
//   report    regenerate summary and stage-curve CSV from persisted run reports
//   gradcheck run the finite-difference gradient check suite

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gradft/gradcheck.hpp"
#include "gradft/gradft.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_gen(const std::string& config_path, const std::string& out_dir) {
  gradft::ExperimentConfig cfg = gradft::load_config(config_path);
  if (!cfg.task) throw gradft::Error("gen: config must define a synthetic 'task'");
  gradft::Task task = gradft::gen_task(*cfg.task);
  fs::create_directories(out_dir);
  gradft::save_dataset(task.train, out_dir + "/train.txt");
  gradft::save_dataset(task.dev, out_dir + "/dev.txt");
  gradft::save_dataset(task.test, out_dir + "/test.txt");
  gradft::save_dataset(task.pool, out_dir + "/pool.txt");
  std::cout << "wrote train (" << task.train.size() << "), dev (" << task.dev.size()
            << "), test (" << task.test.size() << "), pool (" << task.pool.size() << ") to "
            << out_dir << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            const std::string& seeds_override, std::size_t jobs) {
  gradft::ExperimentConfig cfg = gradft::load_config(config_path);
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (!seeds_override.empty()) {
    cfg.seeds.clear();
    std::string s = seeds_override;
    for (char& c : s)
      if (c == ',') c = ' ';
    std::istringstream is(s);
    std::uint64_t v;
    while (is >> v) cfg.seeds.push_back(v);
    if (cfg.seeds.empty()) throw gradft::Error("--seeds: no seeds parsed");
  }
  gradft::ExperimentSummary summary = gradft::run_experiment(cfg, jobs);
  std::cout << gradft::summary_text(summary);
  for (const auto& o : summary.outcomes)
    if (!o.ok)
      std::cerr << "run failed: " << gradft::regime_name(o.regime) << " seed " << o.seed << ": "
                << o.error << "\n";
  return summary.all_ok ? 0 : 1;
}

int cmd_report(const std::string& dir) {
  std::vector<gradft::RunReport> reports;
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("report_", 0) == 0 && entry.path().extension() == ".json")
      paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  for (const std::string& p : paths) reports.push_back(gradft::load_report(p));
  if (reports.empty()) {
    std::cerr << "no report_*.json files in " << dir << "\n";
    return 1;
  }

  std::vector<gradft::Regime> regimes;
  std::vector<gradft::RunOutcome> outcomes;
  for (const gradft::RunReport& r : reports) {
    gradft::RunOutcome o;
    o.regime = gradft::parse_regime(r.regime);
    o.seed = r.master_seed;
    o.ok = true;
    o.report = r;
    outcomes.push_back(std::move(o));
    if (std::find(regimes.begin(), regimes.end(), outcomes.back().regime) == regimes.end())
      regimes.push_back(outcomes.back().regime);
  }
  gradft::ExperimentSummary summary = gradft::summarize(outcomes, regimes);
  {
    std::ofstream fs_csv(dir + "/summary.csv");
    fs_csv << gradft::summary_csv(summary);
    std::ofstream fs_txt(dir + "/summary.txt");
    fs_txt << gradft::summary_text(summary);
    std::ofstream fs_curve(dir + "/stage_curve.csv");
    fs_curve << gradft::emit_stage_curve(reports);
  }
  std::cout << gradft::summary_text(summary);
  return 0;
}

int cmd_gradcheck() {
  gradft::GradCheckResult r = gradft::gradient_check_suite(10, 1e-5);
  std::printf("checked %zu parameters, max relative error %.3e (threshold 1e-4)\n",
              r.params_checked, r.max_rel_error);
  return r.max_rel_error < 1e-4 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradual fine-tuning experiment toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seeds;
  std::size_t jobs = 1;

  CLI::App* gen = app.add_subcommand("gen", "write a synthetic task's datasets to disk");
  gen->add_option("--config", config_path, "experiment config (JSON)")->required();
  gen->add_option("--out", out_dir, "output directory")->required();

  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "override config output_dir");
  run->add_option("--seeds", seeds, "override config seeds (comma-separated)");
  run->add_option("--jobs", jobs, "parallel runs")->default_val(1);

  CLI::App* report = app.add_subcommand("report", "rebuild summary from persisted reports");
  report->add_option("--out", out_dir, "directory holding report_*.json")->required();

  app.add_subcommand("gradcheck", "finite-difference gradient check suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(config_path, out_dir);
    if (run->parsed()) return cmd_run(config_path, out_dir, seeds, jobs);
    if (report->parsed()) return cmd_report(out_dir);
    return cmd_gradcheck();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
