#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gradft/data.hpp"
#include "gradft/model.hpp"
#include "gradft/rng.hpp"

namespace gradft {

// Central-difference gradient of the batch loss. Uses only the loss value,
// never the analytic gradient, so it is an independent check of it.
inline std::vector<double> finite_difference_grad(const Model& m, const Dataset& batch,
                                                  double h = 1e-5) {
  std::vector<double> g(m.params.size(), 0.0);
  Model probe = m;
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    double orig = probe.params[i];
    probe.params[i] = orig + h;
    double lp = loss_and_grad(probe, batch).loss;
    probe.params[i] = orig - h;
    double lm = loss_and_grad(probe, batch).loss;
    probe.params[i] = orig;
    g[i] = (lp - lm) / (2.0 * h);
  }
  return g;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t params_checked = 0;
};

inline GradCheckResult gradient_check(const Model& m, const Dataset& batch, double h = 1e-5) {
  std::vector<double> fd = finite_difference_grad(m, batch, h);
  std::vector<double> an = loss_and_grad(m, batch).grad.values;
  GradCheckResult res;
  res.params_checked = fd.size();
  for (std::size_t i = 0; i < fd.size(); ++i) {
    double denom = std::max({std::abs(fd[i]), std::abs(an[i]), 1e-8});
    res.max_rel_error = std::max(res.max_rel_error, std::abs(fd[i] - an[i]) / denom);
  }
  return res;
}

// The standard suite: 10 seeds, small random specs (linear and one hidden
// layer), random batches. Returns the worst relative error seen.
inline GradCheckResult gradient_check_suite(std::size_t n_seeds = 10, double h = 1e-5) {
  GradCheckResult worst;
  for (std::uint64_t seed = 0; seed < n_seeds; ++seed) {
    Rng rng(1000 + seed);
    ModelSpec spec;
    spec.feature_dim = 2 + rng.uniform_index(5);           // 2..6
    spec.num_classes = 2 + rng.uniform_index(3);           // 2..4
    spec.hidden_dim = (seed % 2 == 0) ? 0 : 2 + rng.uniform_index(4);  // 0 or 2..5
    spec.init_scale = 0.5;
    Model m = init(spec, rng);

    Dataset batch{{}, spec.feature_dim, spec.num_classes};
    std::size_t n = 1 + rng.uniform_index(8);
    for (std::size_t i = 0; i < n; ++i) {
      Example ex;
      ex.label = static_cast<int>(rng.uniform_index(spec.num_classes));
      for (std::size_t j = 0; j < spec.feature_dim; ++j)
        ex.features.push_back(rng.normal());
      batch.examples.push_back(std::move(ex));
    }

    GradCheckResult r = gradient_check(m, batch, h);
    worst.max_rel_error = std::max(worst.max_rel_error, r.max_rel_error);
    worst.params_checked += r.params_checked;
  }
  return worst;
}

}  // namespace gradft
