#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gradft/data.hpp"
#include "gradft/gradual.hpp"
#include "gradft/model.hpp"
#include "gradft/sampling.hpp"
#include "gradft/serialize.hpp"
#include "gradft/synthgen.hpp"
#include "gradft/trainer.hpp"

namespace gradft {

// External datasets loaded from disk instead of a synthetic TaskSpec.
struct TaskFiles {
  std::string train;
  std::string dev;
  std::string test;
  std::string pool;
};

struct ExperimentConfig {
  std::optional<TaskSpec> task;      // exactly one of task / task_files
  std::optional<TaskFiles> task_files;
  Schedule schedule = Schedule::from_amounts({4000, 2000, 500, 0});
  // Defaults chosen so the stock comparison (three regimes, ten seeds) shows
  // the gradual > one_stage > no_ft_single ordering on the stock task: a small
  // base rate with gentle decay and large batches keep each stage's drift
  // modest, which is where the extra intermediate stages pay off.
  LrSchedule lr_schedule = LrSchedule::decay(0.05, 0.85);
  StageHyper stage_hyper{.batch_size = 512};
  ModelSpec model_spec{.hidden_dim = 16};
  std::vector<Regime> regimes;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";

  void validate() const {
    if (regimes.empty()) throw Error("config: at least one regime required");
    if (seeds.empty()) throw Error("config: at least one seed required");
    if (task.has_value() == task_files.has_value())
      throw Error("config: exactly one of 'task' and 'task_files' required");
    if (task && schedule.amounts().front() > task->out_pool_n)
      throw Error("config: schedule infeasible against task out_pool_n");
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::string& section,
                                std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw Error("config: unknown key '" + key + "' in " + section);
  }
}

inline TaskSpec task_spec_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, "task",
                      {"feature_dim", "num_classes", "in_train_n", "in_dev_n", "in_test_n",
                       "out_pool_n", "class_sep", "noise_sigma", "shift_rotation_deg",
                       "shift_translation", "out_prior_skew", "seed"});
  TaskSpec s;
  if (j.contains("feature_dim")) s.feature_dim = j["feature_dim"].get<std::size_t>();
  if (j.contains("num_classes")) s.num_classes = j["num_classes"].get<std::size_t>();
  if (j.contains("in_train_n")) s.in_train_n = j["in_train_n"].get<std::size_t>();
  if (j.contains("in_dev_n")) s.in_dev_n = j["in_dev_n"].get<std::size_t>();
  if (j.contains("in_test_n")) s.in_test_n = j["in_test_n"].get<std::size_t>();
  if (j.contains("out_pool_n")) s.out_pool_n = j["out_pool_n"].get<std::size_t>();
  if (j.contains("class_sep")) s.class_sep = j["class_sep"].get<double>();
  if (j.contains("noise_sigma")) s.noise_sigma = j["noise_sigma"].get<double>();
  if (j.contains("shift_rotation_deg")) s.shift_rotation_deg = j["shift_rotation_deg"].get<double>();
  if (j.contains("shift_translation")) s.shift_translation = j["shift_translation"].get<double>();
  if (j.contains("out_prior_skew")) s.out_prior_skew = j["out_prior_skew"].get<double>();
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  s.validate();
  return s;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(j, "config",
                              {"format_version", "task", "task_files", "schedule", "lr_schedule",
                               "stage_hyper", "model_spec", "regimes", "seeds", "output_dir"});
  if (j.contains("format_version") && j["format_version"].get<int>() != 1)
    throw Error("config: unsupported format_version");
  ExperimentConfig cfg;
  if (j.contains("task")) cfg.task = detail::task_spec_from_json(j["task"]);
  if (j.contains("task_files")) {
    const auto& tf = j["task_files"];
    detail::reject_unknown_keys(tf, "task_files", {"train", "dev", "test", "pool"});
    cfg.task_files = TaskFiles{tf.at("train").get<std::string>(), tf.at("dev").get<std::string>(),
                               tf.at("test").get<std::string>(), tf.at("pool").get<std::string>()};
  }
  if (j.contains("schedule")) cfg.schedule = parse_schedule(j["schedule"].get<std::string>());
  if (j.contains("lr_schedule")) {
    const auto& lj = j["lr_schedule"];
    detail::reject_unknown_keys(lj, "lr_schedule", {"rates", "base_rate", "decay"});
    if (lj.contains("rates")) {
      if (lj.contains("base_rate") || lj.contains("decay"))
        throw Error("config: lr_schedule takes either 'rates' or 'base_rate'+'decay'");
      cfg.lr_schedule = LrSchedule::explicit_rates(lj["rates"].get<std::vector<double>>());
    } else {
      cfg.lr_schedule =
          LrSchedule::decay(lj.at("base_rate").get<double>(), lj.at("decay").get<double>());
    }
  }
  if (j.contains("stage_hyper")) {
    const auto& hj = j["stage_hyper"];
    detail::reject_unknown_keys(hj, "stage_hyper",
                                {"batch_size", "max_epochs", "patience", "min_delta"});
    if (hj.contains("batch_size")) cfg.stage_hyper.batch_size = hj["batch_size"].get<std::size_t>();
    if (hj.contains("max_epochs")) cfg.stage_hyper.max_epochs = hj["max_epochs"].get<std::size_t>();
    if (hj.contains("patience")) cfg.stage_hyper.patience = hj["patience"].get<std::size_t>();
    if (hj.contains("min_delta")) cfg.stage_hyper.min_delta = hj["min_delta"].get<double>();
  }
  if (j.contains("model_spec")) {
    const auto& mj = j["model_spec"];
    detail::reject_unknown_keys(mj, "model_spec", {"hidden_dim", "init_scale"});
    if (mj.contains("hidden_dim")) cfg.model_spec.hidden_dim = mj["hidden_dim"].get<std::size_t>();
    if (mj.contains("init_scale")) cfg.model_spec.init_scale = mj["init_scale"].get<double>();
  }
  if (j.contains("regimes")) {
    cfg.regimes.clear();
    for (const auto& r : j["regimes"]) cfg.regimes.push_back(parse_regime(r.get<std::string>()));
  }
  if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  return config_from_json(j);
}

struct RunOutcome {
  Regime regime;
  std::uint64_t seed = 0;
  bool ok = false;
  RunReport report;       // valid only when ok
  std::string error;      // valid only when !ok
  double wall_seconds = 0.0;
};

struct RegimeSummary {
  Regime regime;
  std::size_t n_runs = 0;
  std::size_t n_failed = 0;
  double mean_test_accuracy = 0.0;
  double stddev_test_accuracy = 0.0;
};

struct ExperimentSummary {
  std::vector<RegimeSummary> regimes;
  std::vector<RunOutcome> outcomes;
  bool all_ok = true;
};

// One (regime, seed) run. Data and model init derive from the master seed,
// so the run is reproducible in isolation.
inline RunOutcome run_single(const ExperimentConfig& cfg, Regime regime, std::uint64_t seed) {
  RunOutcome out;
  out.regime = regime;
  out.seed = seed;
  auto t0 = std::chrono::steady_clock::now();
  try {
    Task task;
    if (cfg.task) {
      TaskSpec eff = *cfg.task;
      eff.seed = cfg.task->seed ^ seed;  // fresh data draw per master seed
      task = gen_task(eff);
    } else {
      task.train = load_dataset(cfg.task_files->train);
      task.dev = load_dataset(cfg.task_files->dev);
      task.test = load_dataset(cfg.task_files->test);
      task.pool = load_dataset(cfg.task_files->pool);
    }

    std::size_t n0 = cfg.schedule.amounts().front();
    Schedule s = regime_schedule(regime, n0, cfg.schedule);

    ModelSpec mspec = cfg.model_spec;
    mspec.feature_dim = task.train.feature_dim;
    mspec.num_classes = task.train.num_classes;

    Rng master(seed);
    Rng init_rng = master.child("init");
    Model m0 = init(mspec, init_rng);

    GradualResult gr = gradual_ft(task.train, task.pool, m0, s, cfg.lr_schedule,
                                  cfg.stage_hyper, task.dev, task.test, master);
    gr.report.regime = regime_name(regime);
    out.report = std::move(gr.report);
    out.ok = true;
  } catch (const Error& e) {
    out.ok = false;
    out.error = e.what();
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (out.ok) out.report.wall_seconds = out.wall_seconds;
  return out;
}

inline std::string report_filename(Regime regime, std::uint64_t seed) {
  return std::string("report_") + regime_name(regime) + "_seed" + std::to_string(seed) + ".json";
}

// Stage-curve CSV: one row per stage index, one column per regime, values
// are dev accuracy averaged over seeds.
inline std::string emit_stage_curve(const std::vector<RunReport>& reports) {
  if (reports.empty()) throw Error("emit_stage_curve: no reports");
  std::vector<std::string> regime_order;
  for (const char* r : {"no_ft_single", "no_ft_mixed", "one_stage", "gradual"}) {
    for (const RunReport& rep : reports)
      if (rep.regime == r) {
        regime_order.push_back(r);
        break;
      }
  }
  std::size_t max_stages = 0;
  for (const RunReport& r : reports) max_stages = std::max(max_stages, r.stages.size());

  std::ostringstream os;
  os << "stage";
  for (const std::string& r : regime_order) os << "," << r;
  os << "\n";
  for (std::size_t t = 0; t < max_stages; ++t) {
    os << t;
    for (const std::string& r : regime_order) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const RunReport& rep : reports) {
        if (rep.regime == r && t < rep.stages.size()) {
          sum += rep.stages[t].dev.accuracy;
          ++n;
        }
      }
      os << ",";
      if (n > 0) os << fmt_double(sum / static_cast<double>(n));
    }
    os << "\n";
  }
  return os.str();
}

inline ExperimentSummary summarize(const std::vector<RunOutcome>& outcomes,
                                   const std::vector<Regime>& regimes) {
  ExperimentSummary summary;
  summary.outcomes = outcomes;
  for (Regime reg : regimes) {
    RegimeSummary rs;
    rs.regime = reg;
    std::vector<double> accs;
    for (const RunOutcome& o : outcomes) {
      if (o.regime != reg) continue;
      ++rs.n_runs;
      if (!o.ok) {
        ++rs.n_failed;
        summary.all_ok = false;
        continue;  // failed runs never contribute to statistics
      }
      accs.push_back(o.report.final_test.accuracy);
    }
    if (!accs.empty()) {
      double sum = 0.0;
      for (double a : accs) sum += a;
      rs.mean_test_accuracy = sum / static_cast<double>(accs.size());
      if (accs.size() > 1) {
        double ss = 0.0;
        for (double a : accs) {
          double d = a - rs.mean_test_accuracy;
          ss += d * d;
        }
        rs.stddev_test_accuracy = std::sqrt(ss / static_cast<double>(accs.size() - 1));
      }
    }
    summary.regimes.push_back(rs);
  }
  return summary;
}

inline std::string summary_csv(const ExperimentSummary& s) {
  std::ostringstream os;
  os << "regime,n_runs,n_failed,mean_test_accuracy,stddev_test_accuracy\n";
  for (const RegimeSummary& r : s.regimes) {
    os << regime_name(r.regime) << "," << r.n_runs << "," << r.n_failed << ","
       << fmt_double(r.mean_test_accuracy) << "," << fmt_double(r.stddev_test_accuracy) << "\n";
  }
  return os.str();
}

inline std::string summary_text(const ExperimentSummary& s) {
  std::ostringstream os;
  os << "regime          runs  failed  test accuracy (mean +- stddev)\n";
  for (const RegimeSummary& r : s.regimes) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-15s %4zu  %6zu  %.4f +- %.4f\n", regime_name(r.regime),
                  r.n_runs, r.n_failed, r.mean_test_accuracy, r.stddev_test_accuracy);
    os << line;
  }
  return os.str();
}

// Runs the full comparison matrix and persists everything under
// cfg.output_dir. Runs may execute in parallel; outputs are assembled in
// deterministic (regime, seed) order regardless of job count.
inline ExperimentSummary run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  cfg.validate();
  std::filesystem::create_directories(cfg.output_dir);

  struct Job {
    Regime regime;
    std::uint64_t seed;
  };
  std::vector<Job> queue;
  for (Regime r : cfg.regimes)
    for (std::uint64_t s : cfg.seeds) queue.push_back({r, s});

  std::vector<RunOutcome> outcomes(queue.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < queue.size(); ++i)
      outcomes[i] = run_single(cfg, queue[i].regime, queue[i].seed);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < std::min(jobs, queue.size()); ++w) {
      workers.emplace_back([&] {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= queue.size()) break;
          outcomes[i] = run_single(cfg, queue[i].regime, queue[i].seed);
        }
      });
    }
    for (std::thread& t : workers) t.join();
  }

  std::vector<RunReport> ok_reports;
  std::ostringstream timings;
  for (const RunOutcome& o : outcomes) {
    std::string base = report_filename(o.regime, o.seed);
    if (o.ok) {
      save_report(o.report, cfg.output_dir + "/" + base);
      ok_reports.push_back(o.report);
    } else {
      std::ofstream fs(cfg.output_dir + "/failed_" + std::string(regime_name(o.regime)) +
                       "_seed" + std::to_string(o.seed) + ".txt");
      fs << o.error << "\n";
    }
    timings << regime_name(o.regime) << " seed " << o.seed << " " << (o.ok ? "ok" : "FAILED")
            << " " << o.wall_seconds << "s\n";
  }
  {
    std::ofstream fs(cfg.output_dir + "/timings.txt");
    fs << timings.str();
  }

  ExperimentSummary summary = summarize(outcomes, cfg.regimes);
  {
    std::ofstream fs(cfg.output_dir + "/summary.csv");
    fs << summary_csv(summary);
  }
  {
    std::ofstream fs(cfg.output_dir + "/summary.txt");
    fs << summary_text(summary);
  }
  if (!ok_reports.empty()) {
    std::ofstream fs(cfg.output_dir + "/stage_curve.csv");
    fs << emit_stage_curve(ok_reports);
  }
  return summary;
}

}  // namespace gradft
