#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gradft/data.hpp"
#include "gradft/model.hpp"
#include "gradft/rng.hpp"
#include "gradft/sampling.hpp"
#include "gradft/trainer.hpp"

namespace gradft {

enum class Regime { NoFtSingle, NoFtMixed, OneStage, Gradual };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::NoFtSingle: return "no_ft_single";
    case Regime::NoFtMixed: return "no_ft_mixed";
    case Regime::OneStage: return "one_stage";
    case Regime::Gradual: return "gradual";
  }
  throw Error("unknown regime");
}

inline Regime parse_regime(const std::string& s) {
  if (s == "no_ft_single") return Regime::NoFtSingle;
  if (s == "no_ft_mixed") return Regime::NoFtMixed;
  if (s == "one_stage") return Regime::OneStage;
  if (s == "gradual") return Regime::Gradual;
  throw Error("unknown regime label '" + s + "'");
}

// All four training regimes are schedules:
//   no_ft_single -> [0], no_ft_mixed -> [n0], one_stage -> [n0, 0],
//   gradual -> the configured schedule unchanged.
inline Schedule regime_schedule(Regime regime, std::size_t n0, const Schedule& gradual_s) {
  switch (regime) {
    case Regime::NoFtSingle: return Schedule::from_amounts({0});
    case Regime::NoFtMixed:
      if (n0 == 0) throw Error("no_ft_mixed requires n0 > 0");
      return Schedule::from_amounts({n0});
    case Regime::OneStage:
      if (n0 == 0) throw Error("one_stage requires n0 > 0");
      return Schedule::from_amounts({n0, 0});
    case Regime::Gradual: return gradual_s;
  }
  throw Error("unknown regime");
}

struct StageReport {
  std::size_t stage_index = 0;  // 0-based t
  std::size_t out_count = 0;    // |O_t|
  std::size_t train_size = 0;   // |T_t| = |D| + |O_t|
  double learning_rate = 0.0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  Metrics dev;
  Metrics test;
};

struct RunReport {
  std::string regime;
  std::string schedule;
  std::vector<StageReport> stages;
  Metrics final_dev;
  Metrics final_test;
  std::uint64_t master_seed = 0;
  double wall_seconds = 0.0;  // not persisted; timing is reported separately
};

struct GradualResult {
  Model model;
  RunReport report;
  // Stage pools as index lists into o0 (O_1, O_2, ...); exposes the nesting
  // chain for verification.
  std::vector<std::vector<std::size_t>> stage_pools;
};

// Gradual-FT: for each amount in the schedule, subsample the previous
// stage's out-of-domain pool, mix with all of D, and train to convergence
// from the previous stage's best model.
//
// Randomness per stage comes from labeled children of the master rng
// ("sample/t", "mix/t", "train/t"), so the data schedule is unaffected by
// how long any stage trains and any stage is reproducible in isolation.
inline GradualResult gradual_ft(const Dataset& d, const Dataset& o0, const Model& m0,
                                const Schedule& s, const LrSchedule& rates,
                                const StageHyper& h, const Dataset& dev, const Dataset& test,
                                const Rng& master) {
  if (d.empty()) throw Error("gradual_ft: in-domain data is empty");
  if (s.amounts().front() > o0.size()) {
    std::ostringstream os;
    os << "schedule infeasible: stage 0 needs " << s.amounts().front()
       << " out-of-domain examples but the pool has " << o0.size();
    throw Error(os.str());
  }
  std::vector<double> lr = stage_rates(rates, s.stages());

  GradualResult res{m0, {}};
  res.report.schedule = s.to_string();
  res.report.master_seed = master.seed();

  // Pools are index lists into o0 so nesting is exact: indices for stage t
  // are drawn from stage t-1's index list.
  std::vector<std::size_t> pool_idx(o0.size());
  std::iota(pool_idx.begin(), pool_idx.end(), std::size_t{0});

  for (std::size_t t = 0; t < s.stages(); ++t) {
    std::size_t amount = s.amounts()[t];
    std::string tag = std::to_string(t);
    if (amount > pool_idx.size()) {
      std::ostringstream os;
      os << "schedule infeasible at stage " << t << ": needs " << amount
         << " but the previous pool has " << pool_idx.size();
      throw Error(os.str());
    }

    Rng sample_rng = master.child("sample/" + tag);
    std::vector<std::size_t> picks = sample_indices(pool_idx.size(), amount, sample_rng);
    std::vector<std::size_t> next_pool(amount);
    for (std::size_t i = 0; i < amount; ++i) next_pool[i] = pool_idx[picks[i]];
    pool_idx = std::move(next_pool);
    res.stage_pools.push_back(pool_idx);

    Dataset out_t = o0.like();
    out_t.examples.reserve(amount);
    for (std::size_t i : pool_idx) out_t.examples.push_back(o0.examples[i]);

    Rng mix_rng = master.child("mix/" + tag);
    Dataset train_t = mix(d, out_t, mix_rng);

    StageHyper stage_h = h;
    stage_h.learning_rate = lr[t];
    Rng train_rng = master.child("train/" + tag);
    TrainResult tr = train_to_convergence(res.model, train_t, dev, stage_h, train_rng);
    res.model = std::move(tr.model);

    StageReport sr;
    sr.stage_index = t;
    sr.out_count = amount;
    sr.train_size = train_t.size();
    sr.learning_rate = lr[t];
    sr.epochs_run = tr.trace.epochs.size();
    sr.best_epoch = tr.trace.best_epoch;
    sr.dev = evaluate(res.model, dev);
    sr.test = evaluate(res.model, test);
    res.report.stages.push_back(std::move(sr));
  }

  res.report.final_dev = res.report.stages.back().dev;
  res.report.final_test = res.report.stages.back().test;
  return res;
}

}  // namespace gradft
