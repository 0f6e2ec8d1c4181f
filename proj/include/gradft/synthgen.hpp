#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "gradft/data.hpp"
#include "gradft/rng.hpp"

namespace gradft {

// Gaussian-blob classification task with a controllable in-domain /
// out-of-domain shift: out-of-domain class means are rotated in the first
// coordinate plane, translated along a fixed direction, and class priors
// can be skewed. Each shift axis is independently controllable and the
// Bayes ceiling is computable from the generative model.
struct TaskSpec {
  std::size_t feature_dim = 10;
  std::size_t num_classes = 4;
  std::size_t in_train_n = 40;
  std::size_t in_dev_n = 1000;
  std::size_t in_test_n = 2000;
  std::size_t out_pool_n = 4000;
  double class_sep = 3.0;           // distance between class means, in units of sigma
  double noise_sigma = 1.0;
  double shift_rotation_deg = 30.0;  // rotation of out-of-domain means in the (0,1) plane
  double shift_translation = 1.0;    // out-of-domain mean offset, in sigma units
  double out_prior_skew = 0.0;       // in [0,1); 0 = uniform class priors
  std::uint64_t seed = 0;

  void validate() const {
    if (feature_dim < 2) throw Error("task spec: feature_dim must be >= 2");
    if (num_classes < 2) throw Error("task spec: num_classes must be >= 2");
    if (num_classes > feature_dim)
      throw Error("task spec: num_classes must not exceed feature_dim (one blob axis per class)");
    if (in_train_n == 0 || in_dev_n == 0 || in_test_n == 0)
      throw Error("task spec: in-domain split sizes must be positive");
    if (!(class_sep > 0)) throw Error("task spec: class_sep must be positive");
    if (!(noise_sigma > 0)) throw Error("task spec: noise_sigma must be positive");
    if (shift_translation < 0) throw Error("task spec: shift_translation must be non-negative");
    if (out_prior_skew < 0 || out_prior_skew >= 1)
      throw Error("task spec: out_prior_skew must be in [0,1)");
    if (!std::isfinite(class_sep) || !std::isfinite(noise_sigma) ||
        !std::isfinite(shift_rotation_deg) || !std::isfinite(shift_translation))
      throw Error("task spec: parameters must be finite");
  }
};

struct Task {
  Dataset train;  // in-domain
  Dataset dev;    // in-domain
  Dataset test;   // in-domain
  Dataset pool;   // out-of-domain
};

namespace detail {

// Class mean k sits at (class_sep * sigma / sqrt(2)) * e_k, so all pairwise
// mean distances equal class_sep * sigma.
inline std::vector<std::vector<double>> in_domain_means(const TaskSpec& spec) {
  double scale = spec.class_sep * spec.noise_sigma / std::sqrt(2.0);
  std::vector<std::vector<double>> means(spec.num_classes,
                                         std::vector<double>(spec.feature_dim, 0.0));
  for (std::size_t k = 0; k < spec.num_classes; ++k) means[k][k] = scale;
  return means;
}

inline std::vector<std::vector<double>> out_domain_means(const TaskSpec& spec) {
  std::vector<std::vector<double>> means = in_domain_means(spec);
  double theta = spec.shift_rotation_deg * 3.14159265358979323846 / 180.0;
  double c = std::cos(theta), s = std::sin(theta);
  // Translation goes along the first axis; a symmetric offset (same for
  // every mean coordinate) would shift all class logits equally and cancel.
  double offset = spec.shift_translation * spec.noise_sigma;
  for (auto& mu : means) {
    double x0 = mu[0], x1 = mu[1];
    mu[0] = c * x0 - s * x1 + offset;
    mu[1] = s * x0 + c * x1;
  }
  return means;
}

// Priors proportional to (1 - skew)^k; skew 0 gives uniform.
inline std::vector<double> out_domain_priors(const TaskSpec& spec) {
  std::vector<double> p(spec.num_classes);
  double w = 1.0, sum = 0.0;
  for (std::size_t k = 0; k < spec.num_classes; ++k) {
    p[k] = w;
    sum += w;
    w *= 1.0 - spec.out_prior_skew;
  }
  for (double& v : p) v /= sum;
  return p;
}

inline std::size_t draw_class(const std::vector<double>& priors, Rng& rng) {
  double u = rng.uniform_real();
  double acc = 0.0;
  for (std::size_t k = 0; k < priors.size(); ++k) {
    acc += priors[k];
    if (u < acc) return k;
  }
  return priors.size() - 1;
}

inline Dataset draw_blobs(const TaskSpec& spec, const std::vector<std::vector<double>>& means,
                          const std::vector<double>& priors, std::size_t n, Domain domain,
                          Rng& rng) {
  Dataset d{{}, spec.feature_dim, spec.num_classes};
  d.examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = draw_class(priors, rng);
    Example ex;
    ex.label = static_cast<int>(k);
    ex.domain = domain;
    ex.features.resize(spec.feature_dim);
    for (std::size_t j = 0; j < spec.feature_dim; ++j)
      ex.features[j] = means[k][j] + spec.noise_sigma * rng.normal();
    d.examples.push_back(std::move(ex));
  }
  return d;
}

}  // namespace detail

inline Task gen_task(const TaskSpec& spec) {
  spec.validate();
  Rng root(spec.seed);
  auto in_means = detail::in_domain_means(spec);
  auto out_means = detail::out_domain_means(spec);
  std::vector<double> uniform(spec.num_classes, 1.0 / static_cast<double>(spec.num_classes));
  std::vector<double> out_priors = detail::out_domain_priors(spec);

  Task task;
  Rng r_train = root.child("in_train");
  Rng r_dev = root.child("in_dev");
  Rng r_test = root.child("in_test");
  Rng r_pool = root.child("out_pool");
  task.train = detail::draw_blobs(spec, in_means, uniform, spec.in_train_n, Domain::InDomain, r_train);
  task.dev = detail::draw_blobs(spec, in_means, uniform, spec.in_dev_n, Domain::InDomain, r_dev);
  task.test = detail::draw_blobs(spec, in_means, uniform, spec.in_test_n, Domain::InDomain, r_test);
  task.pool = detail::draw_blobs(spec, out_means, out_priors, spec.out_pool_n,
                                 Domain::OutOfDomain, r_pool);
  return task;
}

}  // namespace gradft
