#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "gradft/data.hpp"
#include "gradft/rng.hpp"

namespace gradft {

struct ModelSpec {
  std::size_t feature_dim = 0;
  std::size_t num_classes = 2;
  std::size_t hidden_dim = 0;  // 0 -> linear softmax model
  double init_scale = 0.1;

  void validate() const {
    if (feature_dim == 0) throw Error("model spec: feature_dim must be positive");
    if (num_classes < 2) throw Error("model spec: num_classes must be >= 2");
    if (init_scale < 0) throw Error("model spec: init_scale must be non-negative");
  }

  // Flat parameter layout, row-major:
  //   hidden_dim == 0: W (K x d), b (K)
  //   hidden_dim  > 0: W1 (h x d), b1 (h), W2 (K x h), b2 (K)
  std::size_t param_count() const {
    if (hidden_dim == 0) return num_classes * feature_dim + num_classes;
    return hidden_dim * feature_dim + hidden_dim + num_classes * hidden_dim + num_classes;
  }

  bool operator==(const ModelSpec&) const = default;
};

struct Model {
  ModelSpec spec;
  std::vector<double> params;  // layout per ModelSpec::param_count

  bool operator==(const Model&) const = default;
};

struct Gradient {
  std::vector<double> values;  // same layout as Model::params
};

inline Model init(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  Model m{spec, std::vector<double>(spec.param_count(), 0.0)};
  auto fill_uniform = [&](std::size_t begin, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i)
      m.params[begin + i] = rng.uniform_real(-spec.init_scale, spec.init_scale);
  };
  // weights uniform in [-init_scale, init_scale], biases zero
  if (spec.hidden_dim == 0) {
    fill_uniform(0, spec.num_classes * spec.feature_dim);
  } else {
    fill_uniform(0, spec.hidden_dim * spec.feature_dim);
    fill_uniform(spec.hidden_dim * spec.feature_dim + spec.hidden_dim,
                 spec.num_classes * spec.hidden_dim);
  }
  return m;
}

namespace detail {

// In-place stabilized softmax.
inline void softmax(std::vector<double>& logits) {
  double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

struct ForwardState {
  std::vector<double> hidden;  // tanh activations, empty for linear model
  std::vector<double> probs;
};

inline ForwardState forward_state(const Model& m, const std::vector<double>& x) {
  const ModelSpec& s = m.spec;
  if (x.size() != s.feature_dim) {
    std::ostringstream os;
    os << "forward: input dim " << x.size() << " != feature_dim " << s.feature_dim;
    throw Error(os.str());
  }
  ForwardState st;
  st.probs.assign(s.num_classes, 0.0);
  if (s.hidden_dim == 0) {
    const double* W = m.params.data();
    const double* b = W + s.num_classes * s.feature_dim;
    for (std::size_t k = 0; k < s.num_classes; ++k) {
      double z = b[k];
      for (std::size_t j = 0; j < s.feature_dim; ++j) z += W[k * s.feature_dim + j] * x[j];
      st.probs[k] = z;
    }
  } else {
    const double* W1 = m.params.data();
    const double* b1 = W1 + s.hidden_dim * s.feature_dim;
    const double* W2 = b1 + s.hidden_dim;
    const double* b2 = W2 + s.num_classes * s.hidden_dim;
    st.hidden.assign(s.hidden_dim, 0.0);
    for (std::size_t h = 0; h < s.hidden_dim; ++h) {
      double z = b1[h];
      for (std::size_t j = 0; j < s.feature_dim; ++j) z += W1[h * s.feature_dim + j] * x[j];
      st.hidden[h] = std::tanh(z);
    }
    for (std::size_t k = 0; k < s.num_classes; ++k) {
      double z = b2[k];
      for (std::size_t h = 0; h < s.hidden_dim; ++h) z += W2[k * s.hidden_dim + h] * st.hidden[h];
      st.probs[k] = z;
    }
  }
  softmax(st.probs);
  return st;
}

}  // namespace detail

inline std::vector<double> forward(const Model& m, const std::vector<double>& x) {
  return detail::forward_state(m, x).probs;
}

// Ties broken toward the lowest class index.
inline int predict(const Model& m, const std::vector<double>& x) {
  std::vector<double> p = forward(m, x);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

struct LossGrad {
  double loss = 0.0;
  Gradient grad;
};

// Mean cross-entropy over the batch with the exact analytic gradient.
inline LossGrad loss_and_grad(const Model& m, const Dataset& batch) {
  if (batch.empty()) throw Error("loss_and_grad: empty batch");
  const ModelSpec& s = m.spec;
  LossGrad out;
  out.grad.values.assign(m.params.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  for (const Example& ex : batch.examples) {
    detail::ForwardState st = detail::forward_state(m, ex.features);
    double p = st.probs[static_cast<std::size_t>(ex.label)];
    out.loss += -std::log(p);

    // d(loss)/d(logit_k) = p_k - [k == label]
    std::vector<double> dlogit = st.probs;
    dlogit[static_cast<std::size_t>(ex.label)] -= 1.0;

    if (s.hidden_dim == 0) {
      double* gW = out.grad.values.data();
      double* gb = gW + s.num_classes * s.feature_dim;
      for (std::size_t k = 0; k < s.num_classes; ++k) {
        for (std::size_t j = 0; j < s.feature_dim; ++j)
          gW[k * s.feature_dim + j] += dlogit[k] * ex.features[j];
        gb[k] += dlogit[k];
      }
    } else {
      const double* W2 = m.params.data() + s.hidden_dim * s.feature_dim + s.hidden_dim;
      double* gW1 = out.grad.values.data();
      double* gb1 = gW1 + s.hidden_dim * s.feature_dim;
      double* gW2 = gb1 + s.hidden_dim;
      double* gb2 = gW2 + s.num_classes * s.hidden_dim;
      for (std::size_t k = 0; k < s.num_classes; ++k) {
        for (std::size_t h = 0; h < s.hidden_dim; ++h)
          gW2[k * s.hidden_dim + h] += dlogit[k] * st.hidden[h];
        gb2[k] += dlogit[k];
      }
      for (std::size_t h = 0; h < s.hidden_dim; ++h) {
        double dh = 0.0;
        for (std::size_t k = 0; k < s.num_classes; ++k)
          dh += dlogit[k] * W2[k * s.hidden_dim + h];
        double dz = dh * (1.0 - st.hidden[h] * st.hidden[h]);  // tanh'
        for (std::size_t j = 0; j < s.feature_dim; ++j)
          gW1[h * s.feature_dim + j] += dz * ex.features[j];
        gb1[h] += dz;
      }
    }
  }
  out.loss *= inv_n;
  for (double& g : out.grad.values) g *= inv_n;
  return out;
}

inline Metrics evaluate(const Model& m, const Dataset& d) {
  if (d.empty()) throw Error("evaluate: empty dataset");
  Metrics metrics;
  metrics.n = d.size();
  std::vector<std::size_t> class_total(d.num_classes, 0), class_correct(d.num_classes, 0);
  std::size_t correct = 0;
  double loss = 0.0;
  for (const Example& ex : d.examples) {
    std::vector<double> p = forward(m, ex.features);
    int pred = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    std::size_t label = static_cast<std::size_t>(ex.label);
    ++class_total[label];
    if (pred == ex.label) {
      ++correct;
      ++class_correct[label];
    }
    loss += -std::log(p[label]);
  }
  metrics.accuracy = static_cast<double>(correct) / static_cast<double>(d.size());
  metrics.mean_loss = loss / static_cast<double>(d.size());
  metrics.per_class_accuracy.resize(d.num_classes);
  for (std::size_t k = 0; k < d.num_classes; ++k) {
    if (class_total[k] > 0)
      metrics.per_class_accuracy[k] =
          static_cast<double>(class_correct[k]) / static_cast<double>(class_total[k]);
  }
  return metrics;
}

}  // namespace gradft
