#include <catch_amalgamated.hpp>

#include <cmath>

#include "gradft/gradcheck.hpp"
#include "gradft/model.hpp"
#include "gradft/rng.hpp"

using namespace gradft;

namespace {

Model zero_model(std::size_t dim, std::size_t k, std::size_t hidden = 0) {
  ModelSpec spec{dim, k, hidden, 0.0};
  Rng rng(0);
  return init(spec, rng);
}

Dataset batch_of(std::size_t dim, std::size_t k, std::vector<std::pair<std::vector<double>, int>> rows) {
  Dataset d{{}, dim, k};
  for (auto& [x, y] : rows) d.examples.push_back({x, y, Domain::InDomain, ""});
  return d;
}

}  // namespace

TEST_CASE("init is deterministic and shapes follow the parameter layout") {
  ModelSpec spec{10, 4, 0, 0.1};
  Rng a(7), b(7);
  Model m1 = init(spec, a), m2 = init(spec, b);
  REQUIRE(m1 == m2);
  REQUIRE(m1.params.size() == 4 * 10 + 4);  // W 4x10, b 4
  // biases (tail of the layout) are zero
  for (std::size_t i = 40; i < 44; ++i) REQUIRE(m1.params[i] == 0.0);
}

TEST_CASE("init with init_scale 0 gives all-zero parameters") {
  Model m = zero_model(5, 3, 4);
  for (double p : m.params) REQUIRE(p == 0.0);
}

TEST_CASE("zero model predicts uniformly") {
  Model m = zero_model(3, 4);
  std::vector<double> p = forward(m, {1.0, -2.0, 0.5});
  for (double v : p) REQUIRE(v == Catch::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("forward output sums to one, even for large inputs") {
  Rng rng(21);
  ModelSpec spec{4, 3, 5, 0.5};
  Model m = init(spec, rng);
  for (double scale : {1.0, 100.0, 1000.0}) {
    std::vector<double> x = {scale, -scale, scale / 2, scale};
    std::vector<double> p = forward(m, x);
    double sum = 0;
    for (double v : p) {
      REQUIRE(std::isfinite(v));
      REQUIRE(v >= 0.0);
      sum += v;
    }
    REQUIRE(sum == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("hand-computed softmax on a 2x2 linear model") {
  // W = I, b = 0, x = (10, 0): probs = (e^10, 1) / (e^10 + 1)
  Model m = zero_model(2, 2);
  m.params[0] = 1.0;  // W[0][0]
  m.params[3] = 1.0;  // W[1][1]
  std::vector<double> p = forward(m, {10.0, 0.0});
  double z = std::exp(10.0) + 1.0;
  REQUIRE(p[0] == Catch::Approx(std::exp(10.0) / z).epsilon(1e-12));
  REQUIRE(p[1] == Catch::Approx(1.0 / z).epsilon(1e-12));
}

TEST_CASE("forward rejects dimension mismatch") {
  Model m = zero_model(3, 2);
  REQUIRE_THROWS_AS(forward(m, {1.0, 2.0}), Error);
}

TEST_CASE("zero model loss is ln K") {
  Model m = zero_model(3, 4);
  Dataset b = batch_of(3, 4, {{{1, 2, 3}, 0}, {{0, 0, 1}, 3}});
  REQUIRE(loss_and_grad(m, b).loss == Catch::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("near-perfect fit has near-zero loss") {
  Model m = zero_model(2, 2);
  m.params[0] = 50.0;   // class 0 strongly favored when x0 > 0
  m.params[3] = 50.0;
  Dataset b = batch_of(2, 2, {{{1, 0}, 0}, {{0, 1}, 1}});
  REQUIRE(loss_and_grad(m, b).loss <= 1e-11);
}

TEST_CASE("loss_and_grad rejects an empty batch") {
  Model m = zero_model(2, 2);
  Dataset b{{}, 2, 2};
  REQUIRE_THROWS_AS(loss_and_grad(m, b), Error);
}

TEST_CASE("analytic gradient matches central finite differences") {
  GradCheckResult r = gradient_check_suite(10, 1e-5);
  REQUIRE(r.params_checked > 0);
  REQUIRE(r.max_rel_error < 1e-4);
}

TEST_CASE("gradient check on a small named case") {
  Rng rng(17);
  ModelSpec spec{3, 3, 4, 0.5};
  Model m = init(spec, rng);
  Dataset b{{}, 3, 3};
  for (int i = 0; i < 5; ++i) {
    Example ex;
    ex.label = static_cast<int>(rng.uniform_index(3));
    for (int j = 0; j < 3; ++j) ex.features.push_back(rng.normal());
    b.examples.push_back(ex);
  }
  REQUIRE(gradient_check(m, b, 1e-5).max_rel_error < 1e-4);
}

TEST_CASE("predict breaks ties toward the lowest index") {
  Model m = zero_model(3, 4);
  REQUIRE(predict(m, {1.0, 2.0, 3.0}) == 0);
}

TEST_CASE("predict picks the argmax") {
  Model m = zero_model(2, 3);
  // logits (0, 5, 1) for x = (1, 0)
  m.params[2] = 5.0;  // W[1][0]
  m.params[4] = 1.0;  // W[2][0]
  REQUIRE(predict(m, {1.0, 0.0}) == 1);
}

TEST_CASE("predict is invariant to a uniform logit shift") {
  Rng rng(23);
  ModelSpec spec{4, 3, 0, 0.5};
  Model m = init(spec, rng);
  Model shifted = m;
  // add a constant to every class's bias
  for (std::size_t k = 0; k < 3; ++k) shifted.params[3 * 4 + k] += 7.5;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x;
    for (int j = 0; j < 4; ++j) x.push_back(rng.normal());
    REQUIRE(predict(m, x) == predict(shifted, x));
  }
}

TEST_CASE("evaluate: perfect memorization gives accuracy 1") {
  Model m = zero_model(2, 2);
  m.params[0] = 50.0;
  m.params[3] = 50.0;
  Dataset d = batch_of(2, 2, {{{1, 0}, 0}, {{0, 1}, 1}, {{2, 0}, 0}});
  Metrics metrics = evaluate(m, d);
  REQUIRE(metrics.accuracy == 1.0);
  REQUIRE(metrics.n == 3);
}

TEST_CASE("evaluate: zero model accuracy equals class 0's share") {
  Model m = zero_model(2, 4);
  Dataset d = batch_of(2, 4, {{{1, 1}, 0}, {{2, 2}, 1}, {{3, 3}, 2}, {{4, 4}, 3}});
  Metrics metrics = evaluate(m, d);
  REQUIRE(metrics.accuracy == 0.25);
  REQUIRE(metrics.per_class_accuracy[0].value() == 1.0);
  REQUIRE(metrics.per_class_accuracy[1].value() == 0.0);
}

TEST_CASE("evaluate marks classes without examples as absent") {
  Model m = zero_model(2, 3);
  Dataset d = batch_of(2, 3, {{{1, 1}, 0}});
  Metrics metrics = evaluate(m, d);
  REQUIRE(metrics.per_class_accuracy[0].has_value());
  REQUIRE_FALSE(metrics.per_class_accuracy[1].has_value());
  REQUIRE_FALSE(metrics.per_class_accuracy[2].has_value());
}

TEST_CASE("evaluate rejects an empty dataset") {
  Model m = zero_model(2, 2);
  Dataset d{{}, 2, 2};
  REQUIRE_THROWS_AS(evaluate(m, d), Error);
}
