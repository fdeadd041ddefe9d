#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "raterkit/agreement.hpp"
#include "raterkit/corpus.hpp"
#include "raterkit/representations.hpp"

namespace raterkit::classifier {

inline constexpr int kClasses = kNumLabels;

/// Multinomial logistic regression. weights is K x (D + 1), row-major, with
/// the bias in the last column.
struct SoftmaxModel {
  std::size_t dim = 0;
  std::vector<double> weights;
  std::size_t epochs_run = 0;
  double final_loss = 0.0;
  std::vector<double> dev_accuracy;  // per epoch; empty when there is no dev set

  static SoftmaxModel zeros(std::size_t dim);
  double weight(int cls, std::size_t feature) const { return weights[static_cast<std::size_t>(cls) * (dim + 1) + feature]; }
  double bias(int cls) const { return weight(cls, dim); }
};

struct TrainConfig {
  double learning_rate = 0.5;
  double l2_penalty = 1e-4;
  std::size_t max_epochs = 500;
  double tolerance = 1e-9;
  std::uint64_t seed = 0;
};

/// Design matrix view: one feature row and one label per example.
struct Examples {
  std::vector<const std::vector<double>*> features;
  std::vector<int> labels;
};

/// Mean cross-entropy plus l2_penalty * ||W without bias||^2, and its gradient
/// laid out like SoftmaxModel::weights.
double loss_and_gradient(const std::vector<double>& weights, std::size_t dim, const Examples& data,
                         double l2_penalty, std::vector<double>* gradient);

/// Full-batch gradient descent on the train partition. The step is halved
/// whenever a step would increase the loss.
SoftmaxModel train_softmax(const repr::VectorSet& vectors, const std::map<ItemKey, int>& gold,
                           const corpus::SplitAssignment& split, const TrainConfig& config);

struct Prediction {
  int label = 0;
  std::array<double, kClasses> probabilities{};
};

Prediction predict_one(const SoftmaxModel& model, const std::vector<double>& features);
std::map<ItemKey, Prediction> predict(const SoftmaxModel& model, const repr::VectorSet& vectors);

struct Evaluation {
  double accuracy = 0.0;
  std::size_t n_items = 0;
  agreement::ConfusionMatrix confusion{kClasses};  // rows gold, columns predicted
};

Evaluation evaluate(const SoftmaxModel& model, const repr::VectorSet& vectors, const std::map<ItemKey, int>& gold,
                    const std::vector<ItemKey>& items);

/// Predictions as score records so a model can sit in a reliability table.
std::vector<corpus::ScoreRecord> as_rater(const std::map<ItemKey, Prediction>& predictions,
                                          const std::string& rater_id, const std::string& epoch);

std::string model_to_json(const SoftmaxModel& model);
SoftmaxModel model_from_json(const std::string& text);
void write_predictions(std::ostream& out, const std::map<ItemKey, Prediction>& predictions);

}  // namespace raterkit::classifier
