#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "gradft/model.hpp"
#include "gradft/rng.hpp"
#include "gradft/trainer.hpp"

using namespace gradft;

namespace {

// Two classes separated along the first coordinate; the construction
// guarantees a perfect linear separator (x0 = 0).
Dataset separable_set(std::size_t n_per_class, Rng& rng) {
  Dataset d{{}, 2, 2};
  for (std::size_t i = 0; i < n_per_class; ++i) {
    d.examples.push_back({{-2.0 + 0.5 * rng.normal(), rng.normal()}, 0, Domain::InDomain, ""});
    d.examples.push_back({{2.0 + 0.5 * rng.normal(), rng.normal()}, 1, Domain::InDomain, ""});
  }
  return d;
}

Model small_model(Rng& rng) {
  ModelSpec spec{2, 2, 0, 0.1};
  return init(spec, rng);
}

}  // namespace

TEST_CASE("lr = 0 returns a bit-identical model") {
  Rng rng(1);
  Dataset train = separable_set(10, rng);
  Model m = small_model(rng);
  Rng erng(2);
  EpochResult r = train_epoch(m, train, 0.0, 4, erng);
  REQUIRE(r.model == m);
}

TEST_CASE("batch_size >= |train| performs exactly one update") {
  Rng rng(3);
  Dataset train = separable_set(5, rng);
  Model m = small_model(rng);
  // one big batch must equal a single full-batch gradient step on the
  // identically shuffled data
  Rng erng(4);
  EpochResult r = train_epoch(m, train, 0.5, 1000, erng);
  LossGrad lg = loss_and_grad(m, train);
  Model expect = m;
  for (std::size_t i = 0; i < expect.params.size(); ++i)
    expect.params[i] -= 0.5 * lg.grad.values[i];
  for (std::size_t i = 0; i < expect.params.size(); ++i)
    REQUIRE(r.model.params[i] == Catch::Approx(expect.params[i]).margin(1e-15));
  REQUIRE(r.mean_loss == Catch::Approx(lg.loss).margin(1e-15));
}

TEST_CASE("a separable set is fit perfectly within 50 epochs") {
  Rng rng(5);
  Dataset train = separable_set(20, rng);
  // separability oracle: the classes do not overlap on x0
  double max0 = -1e9, min1 = 1e9;
  for (const Example& e : train.examples) {
    if (e.label == 0) max0 = std::max(max0, e.features[0]);
    else min1 = std::min(min1, e.features[0]);
  }
  REQUIRE(max0 < min1);

  Model m = small_model(rng);
  Rng erng(6);
  for (int epoch = 0; epoch < 50; ++epoch)
    m = train_epoch(m, train, 0.1, 8, erng).model;
  REQUIRE(evaluate(m, train).accuracy == 1.0);
}

TEST_CASE("train_epoch rejects an empty training set") {
  Rng rng(7);
  Model m = small_model(rng);
  Dataset empty{{}, 2, 2};
  REQUIRE_THROWS_AS(train_epoch(m, empty, 0.1, 4, rng), Error);
}

TEST_CASE("a huge learning rate raises training divergence") {
  Rng rng(8);
  Dataset train = separable_set(20, rng);
  Model m = small_model(rng);
  Rng erng(9);
  bool diverged = false;
  try {
    for (int epoch = 1; epoch <= 50; ++epoch)
      m = train_epoch(m, train, 1e6, 8, erng, static_cast<std::size_t>(epoch)).model;
  } catch (const TrainingDivergence& e) {
    diverged = true;
    REQUIRE(e.epoch() >= 1);
  }
  REQUIRE(diverged);
}

TEST_CASE("patience 1 on a constant-accuracy dev set stops after epoch 2") {
  Rng rng(10);
  Dataset train = separable_set(10, rng);
  // dev set the model always gets right: far from the boundary
  Dataset dev{{}, 2, 2};
  dev.examples.push_back({{-100.0, 0.0}, 0, Domain::InDomain, ""});
  dev.examples.push_back({{100.0, 0.0}, 1, Domain::InDomain, ""});

  // model that already classifies dev perfectly
  Model m = small_model(rng);
  m.params = {-1.0, 0.0, 1.0, 0.0, 0.0, 0.0};  // W=[[-1,0],[1,0]], b=0

  StageHyper h;
  h.learning_rate = 0.01;
  h.batch_size = 8;
  h.max_epochs = 100;
  h.patience = 1;
  Rng trng(11);
  TrainResult r = train_to_convergence(m, train, dev, h, trng);
  REQUIRE(r.trace.epochs.size() == 2);
  REQUIRE(r.trace.best_epoch == 1);
  REQUIRE(r.trace.stopped_reason == StopReason::PatienceExhausted);
}

TEST_CASE("returned model is the best-dev snapshot") {
  Rng rng(12);
  Dataset all = separable_set(40, rng);
  Dataset train{{}, 2, 2}, dev{{}, 2, 2};
  for (std::size_t i = 0; i < all.size(); ++i)
    (i % 4 == 0 ? dev : train).examples.push_back(all.examples[i]);

  Model m = small_model(rng);
  StageHyper h;
  h.learning_rate = 0.2;
  h.batch_size = 8;
  h.max_epochs = 30;
  h.patience = 30;
  Rng trng(13);
  TrainResult r = train_to_convergence(m, train, dev, h, trng);

  double best = 0.0;
  for (const EpochRecord& rec : r.trace.epochs) best = std::max(best, rec.dev_accuracy);
  double returned = evaluate(r.model, dev).accuracy;
  REQUIRE(returned == Catch::Approx(best).margin(1e-12));
  REQUIRE(r.trace.epochs[r.trace.best_epoch - 1].dev_accuracy == Catch::Approx(best));
}

TEST_CASE("training is deterministic in (model, data, hyper, seed)") {
  Rng rng(14);
  Dataset train = separable_set(15, rng);
  Dataset dev = separable_set(5, rng);
  Model m = small_model(rng);
  StageHyper h;
  h.learning_rate = 0.1;
  h.batch_size = 4;
  h.max_epochs = 20;
  h.patience = 5;
  Rng t1(15), t2(15);
  TrainResult r1 = train_to_convergence(m, train, dev, h, t1);
  TrainResult r2 = train_to_convergence(m, train, dev, h, t2);
  REQUIRE(r1.model == r2.model);
  REQUIRE(r1.trace.epochs.size() == r2.trace.epochs.size());
  REQUIRE(r1.trace.best_epoch == r2.trace.best_epoch);
}

TEST_CASE("train_to_convergence rejects an empty dev set") {
  Rng rng(16);
  Dataset train = separable_set(5, rng);
  Model m = small_model(rng);
  StageHyper h;
  Dataset empty{{}, 2, 2};
  REQUIRE_THROWS_AS(train_to_convergence(m, train, empty, h, rng), Error);
}

TEST_CASE("stage_rates: explicit list passes through") {
  LrSchedule s = LrSchedule::explicit_rates({1e-4, 1e-4, 1e-4, 4e-5});
  REQUIRE(stage_rates(s, 4) == std::vector<double>{1e-4, 1e-4, 1e-4, 4e-5});
}

TEST_CASE("stage_rates: explicit list length must match") {
  LrSchedule s = LrSchedule::explicit_rates({1e-4, 4e-5});
  REQUIRE_THROWS_AS(stage_rates(s, 3), Error);
}

TEST_CASE("stage_rates: decay form is geometric") {
  REQUIRE(stage_rates(LrSchedule::decay(1e-4, 1.0), 4) ==
          std::vector<double>{1e-4, 1e-4, 1e-4, 1e-4});
  auto r = stage_rates(LrSchedule::decay(1e-4, 0.5), 3);
  REQUIRE(r[0] == Catch::Approx(1e-4));
  REQUIRE(r[1] == Catch::Approx(5e-5));
  REQUIRE(r[2] == Catch::Approx(2.5e-5));
}

TEST_CASE("lr schedule construction validates its inputs") {
  REQUIRE_THROWS_AS(LrSchedule::explicit_rates({1e-4, 0.0}), Error);
  REQUIRE_THROWS_AS(LrSchedule::decay(0.0, 0.5), Error);
  REQUIRE_THROWS_AS(LrSchedule::decay(1e-4, 1.5), Error);
}
