#include <doctest.h>

#include <cmath>
#include <sstream>

#include "raterkit/classifier.hpp"
#include "raterkit/random.hpp"

using namespace raterkit;
using namespace raterkit::classifier;

TEST_CASE("prediction from fixed weights") {
  auto zero = SoftmaxModel::zeros(2);
  auto p = predict_one(zero, {0.3, -0.7});
  CHECK(p.label == 0);
  for (double x : p.probabilities) CHECK(x == doctest::Approx(1.0 / 3.0));

  SoftmaxModel m = SoftmaxModel::zeros(1);
  // Rows: class 0 (w=1, b=0), class 1 (w=-2, b=0.5), class 2 (w=0.5, b=-1).
  m.weights = {1.0, 0.0, -2.0, 0.5, 0.5, -1.0};
  const double x = 0.8;
  const double s[3] = {1.0 * x, -2.0 * x + 0.5, 0.5 * x - 1.0};
  const double z = std::exp(s[0]) + std::exp(s[1]) + std::exp(s[2]);
  auto q = predict_one(m, {x});
  for (int k = 0; k < 3; ++k) CHECK(q.probabilities[k] == doctest::Approx(std::exp(s[k]) / z).epsilon(1e-14));
  CHECK(q.label == 0);
  CHECK(q.probabilities[0] + q.probabilities[1] + q.probabilities[2] == doctest::Approx(1.0).epsilon(1e-12));

  auto shifted = m;
  for (int k = 0; k < 3; ++k) shifted.weights[static_cast<std::size_t>(k) * 2 + 1] += 7.5;
  auto r = predict_one(shifted, {x});
  for (int k = 0; k < 3; ++k) CHECK(r.probabilities[k] == doctest::Approx(q.probabilities[k]).epsilon(1e-12));

  // Padding with zero features and zero weights changes nothing.
  SoftmaxModel wide = SoftmaxModel::zeros(3);
  for (int k = 0; k < 3; ++k) {
    wide.weights[static_cast<std::size_t>(k) * 4] = m.weights[static_cast<std::size_t>(k) * 2];
    wide.weights[static_cast<std::size_t>(k) * 4 + 3] = m.bias(k);
  }
  auto w = predict_one(wide, {x, 0.0, 0.0});
  for (int k = 0; k < 3; ++k) CHECK(w.probabilities[k] == doctest::Approx(q.probabilities[k]).epsilon(1e-15));
  CHECK_THROWS_AS(predict_one(m, {1.0, 2.0}), Error);
}

TEST_CASE("training behaviour") {
  repr::VectorSet vs(1, repr::Provenance::external);
  std::map<ItemKey, int> gold;
  corpus::SplitAssignment split;
  vs.add({"s1", "t"}, {0.4});
  gold[{"s1", "t"}] = 1;
  split.partition[{"s1", "t"}] = corpus::Partition::train;
  TrainConfig cfg;
  cfg.l2_penalty = 0.0;
  cfg.tolerance = 1e-15;
  double prev = 0.0;
  for (std::size_t epochs : {10, 100, 1000}) {
    cfg.max_epochs = epochs;
    auto model = train_softmax(vs, gold, split, cfg);
    auto p = predict_one(model, {0.4});
    CHECK(p.label == 1);
    CHECK(p.probabilities[1] > prev);
    prev = p.probabilities[1];
  }
  CHECK(prev > 0.99);

  // Heavy regularization drives the weights toward zero.
  repr::VectorSet many(2, repr::Provenance::external);
  Rng rng(4);
  for (int i = 0; i < 30; ++i) {
    ItemKey key{"s" + std::to_string(i), "t"};
    many.add(key, {rng.normal(), rng.normal()});
    gold[key] = i % 3;
    split.partition[key] = corpus::Partition::train;
  }
  cfg.max_epochs = 300;
  cfg.l2_penalty = 1e4;
  cfg.learning_rate = 1e-4;
  auto flat = train_softmax(many, gold, split, cfg);
  for (std::size_t f = 0; f < 2; ++f) {
    for (int k = 0; k < 3; ++k) CHECK(std::abs(flat.weight(k, f)) < 1e-3);
  }

  // Loss never rises across epochs: rerun with growing epoch caps.
  cfg.l2_penalty = 1e-3;
  cfg.learning_rate = 5.0;
  double last = 1e300;
  for (std::size_t epochs = 1; epochs <= 30; ++epochs) {
    cfg.max_epochs = epochs;
    auto model = train_softmax(many, gold, split, cfg);
    CHECK(model.final_loss <= last + 1e-15);
    last = model.final_loss;
  }

  corpus::SplitAssignment missing;
  missing.partition[{"ghost", "t"}] = corpus::Partition::train;
  try {
    train_softmax(many, gold, missing, cfg);
    FAIL("expected missing item");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
  cfg.max_epochs = 50;
  auto a = train_softmax(many, gold, split, cfg);
  auto b = train_softmax(many, gold, split, cfg);
  CHECK(a.weights == b.weights);
}

TEST_CASE("evaluation and machine rater records") {
  SoftmaxModel m = SoftmaxModel::zeros(1);
  m.weights = {-5.0, 0.0, 0.0, 0.0, 5.0, 0.0};  // class 0 for negative x, class 2 for positive
  repr::VectorSet vs(1, repr::Provenance::external);
  vs.add({"a", "t"}, {-1.0});
  vs.add({"b", "t"}, {1.0});
  vs.add({"c", "t"}, {2.0});
  std::map<ItemKey, int> gold{{{"a", "t"}, 0}, {{"b", "t"}, 2}, {{"c", "t"}, 1}};
  auto e = evaluate(m, vs, gold, {{"a", "t"}, {"b", "t"}, {"c", "t"}});
  CHECK(e.accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(e.confusion.at(1, 2) == 1);
  CHECK_THROWS_AS(evaluate(m, vs, gold, {}), Error);

  auto preds = predict(m, vs);
  auto records = as_rater(preds, "ML", "current");
  CHECK(records.size() == 3);
  CHECK(records[0].rater_id == "ML");
  CHECK(as_rater({}, "ML", "current").empty());

  auto back = model_from_json(model_to_json(m));
  CHECK(back.weights == m.weights);
  CHECK(back.dim == 1);
  std::ostringstream out;
  write_predictions(out, preds);
  CHECK(out.str().rfind("student_id,task_id,label,p0,p1,p2\n", 0) == 0);
}
