#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "gradft/data.hpp"
#include "gradft/model.hpp"
#include "gradft/rng.hpp"
#include "gradft/sampling.hpp"

namespace gradft {

// Raised when a loss or gradient goes non-finite mid-training, the
// observable form of model collapse under an overly large learning rate.
class TrainingDivergence : public Error {
 public:
  TrainingDivergence(std::size_t epoch, std::size_t batch, const std::string& what_part)
      : Error(format_(epoch, batch, what_part)), epoch_(epoch), batch_(batch) {}

  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  static std::string format_(std::size_t epoch, std::size_t batch, const std::string& part) {
    std::ostringstream os;
    os << "training diverged (non-finite " << part << ") at epoch " << epoch << ", batch "
       << batch;
    return os.str();
  }
  std::size_t epoch_;
  std::size_t batch_;
};

struct StageHyper {
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 200;
  std::size_t patience = 5;
  double min_delta = 0.0;

  void validate() const {
    if (learning_rate < 0) throw Error("hyper: learning_rate must be non-negative");
    if (batch_size == 0) throw Error("hyper: batch_size must be positive");
    if (max_epochs == 0) throw Error("hyper: max_epochs must be positive");
    if (patience == 0) throw Error("hyper: patience must be positive");
    if (patience > max_epochs) throw Error("hyper: patience must not exceed max_epochs");
    if (min_delta < 0) throw Error("hyper: min_delta must be non-negative");
  }
};

// Per-stage learning rates: either an explicit list (one per stage) or a
// geometric decay base_rate * decay^t.
struct LrSchedule {
  struct Decay {
    double base_rate;
    double decay;
  };
  std::variant<std::vector<double>, Decay> form;

  static LrSchedule explicit_rates(std::vector<double> rates) {
    for (double r : rates)
      if (!(r > 0)) throw Error("lr schedule: rates must be positive");
    return LrSchedule{std::move(rates)};
  }

  static LrSchedule decay(double base_rate, double decay_factor) {
    if (!(base_rate > 0)) throw Error("lr schedule: base rate must be positive");
    if (!(decay_factor > 0) || decay_factor > 1)
      throw Error("lr schedule: decay must be in (0, 1]");
    return LrSchedule{Decay{base_rate, decay_factor}};
  }
};

inline std::vector<double> stage_rates(const LrSchedule& s, std::size_t n_stages) {
  if (const auto* rates = std::get_if<std::vector<double>>(&s.form)) {
    if (rates->size() != n_stages) {
      std::ostringstream os;
      os << "lr schedule: explicit list has " << rates->size() << " rates but schedule has "
         << n_stages << " stages";
      throw Error(os.str());
    }
    return *rates;
  }
  const auto& d = std::get<LrSchedule::Decay>(s.form);
  std::vector<double> out(n_stages);
  double r = d.base_rate;
  for (std::size_t t = 0; t < n_stages; ++t) {
    out[t] = r;
    r *= d.decay;
  }
  return out;
}

enum class StopReason { PatienceExhausted, MaxEpochs };

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_accuracy = 0.0;
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based; earliest epoch attaining the best dev accuracy
  StopReason stopped_reason = StopReason::MaxEpochs;
};

struct EpochResult {
  Model model;
  double mean_loss = 0.0;
};

// One pass: shuffle, partition into batches (last may be short), one plain
// gradient-descent update per batch.
inline EpochResult train_epoch(const Model& m, const Dataset& train, double lr,
                               std::size_t batch_size, Rng& rng, std::size_t epoch_index = 0) {
  if (train.empty()) throw Error("train_epoch: empty training set");
  Dataset shuffled = train;
  shuffle(shuffled, rng);

  EpochResult res{m, 0.0};
  std::size_t n_batches = 0;
  for (std::size_t start = 0; start < shuffled.size(); start += batch_size) {
    std::size_t end = std::min(start + batch_size, shuffled.size());
    Dataset batch = train.like();
    batch.examples.assign(shuffled.examples.begin() + static_cast<std::ptrdiff_t>(start),
                          shuffled.examples.begin() + static_cast<std::ptrdiff_t>(end));
    LossGrad lg = loss_and_grad(res.model, batch);
    if (!std::isfinite(lg.loss)) throw TrainingDivergence(epoch_index, n_batches, "loss");
    for (double g : lg.grad.values)
      if (!std::isfinite(g)) throw TrainingDivergence(epoch_index, n_batches, "gradient");
    for (std::size_t i = 0; i < res.model.params.size(); ++i)
      res.model.params[i] -= lr * lg.grad.values[i];
    res.mean_loss += lg.loss;
    ++n_batches;
  }
  res.mean_loss /= static_cast<double>(n_batches);
  return res;
}

struct TrainResult {
  Model model;  // best-dev snapshot, not the last epoch
  TrainTrace trace;
};

// Train(M, T): minibatch gradient descent with dev-accuracy early stopping.
// Stops after `patience` consecutive epochs without an improvement of at
// least min_delta over the best dev accuracy; returns the best snapshot.
inline TrainResult train_to_convergence(const Model& m0, const Dataset& train,
                                        const Dataset& dev, const StageHyper& h, Rng& rng) {
  h.validate();
  if (train.empty()) throw Error("train_to_convergence: empty training set");
  if (dev.empty()) throw Error("train_to_convergence: empty dev set");

  TrainResult res{m0, {}};
  Model current = m0;
  double best_acc = -1.0;
  std::size_t bad_epochs = 0;
  res.trace.stopped_reason = StopReason::MaxEpochs;

  for (std::size_t epoch = 1; epoch <= h.max_epochs; ++epoch) {
    EpochResult er = train_epoch(current, train, h.learning_rate, h.batch_size, rng, epoch);
    current = std::move(er.model);
    double dev_acc = evaluate(current, dev).accuracy;
    res.trace.epochs.push_back({epoch, er.mean_loss, dev_acc});

    if (dev_acc > best_acc + h.min_delta) {
      best_acc = dev_acc;
      res.model = current;
      res.trace.best_epoch = epoch;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs >= h.patience) {
        res.trace.stopped_reason = StopReason::PatienceExhausted;
        break;
      }
    }
  }
  return res;
}

}  // namespace gradft
