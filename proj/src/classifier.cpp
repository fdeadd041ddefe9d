#include "raterkit/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "raterkit/csv.hpp"
#include "raterkit/random.hpp"

namespace raterkit::classifier {
namespace {

std::array<double, kClasses> scores(const std::vector<double>& w, std::size_t dim, const std::vector<double>& x) {
  std::array<double, kClasses> s{};
  for (std::size_t k = 0; k < kClasses; ++k) {
    const double* row = w.data() + k * (dim + 1);
    double acc = row[dim];
    for (std::size_t j = 0; j < dim; ++j) {
      acc += row[j] * x[j];
    }
    s[k] = acc;
  }
  return s;
}

std::array<double, kClasses> softmax(const std::array<double, kClasses>& s) {
  const double m = *std::max_element(s.begin(), s.end());
  std::array<double, kClasses> p{};
  double z = 0.0;
  for (std::size_t k = 0; k < kClasses; ++k) {
    p[k] = std::exp(s[k] - m);
    z += p[k];
  }
  for (auto& v : p) {
    v /= z;
  }
  return p;
}

Examples gather(const repr::VectorSet& vectors, const std::map<ItemKey, int>& gold,
                const std::vector<ItemKey>& items, const char* partition) {
  Examples ex;
  for (const auto& key : items) {
    const auto* v = vectors.find(key);
    if (!v) {
      throw Error(Errc::not_found, std::string("no vector for ") + partition + " item " + to_string(key));
    }
    auto it = gold.find(key);
    if (it == gold.end()) {
      throw Error(Errc::not_found, std::string("no gold label for ") + partition + " item " + to_string(key));
    }
    if (it->second < 0 || it->second >= kClasses) {
      throw Error(Errc::invalid_argument, "gold label out of range for " + to_string(key));
    }
    ex.features.push_back(v);
    ex.labels.push_back(it->second);
  }
  return ex;
}

double accuracy_of(const std::vector<double>& w, std::size_t dim, const Examples& ex) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ex.labels.size(); ++i) {
    auto s = scores(w, dim, *ex.features[i]);
    hits += static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin()) == ex.labels[i];
  }
  return ex.labels.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(ex.labels.size());
}

}  // namespace

SoftmaxModel SoftmaxModel::zeros(std::size_t dim) {
  SoftmaxModel m;
  m.dim = dim;
  m.weights.assign(kClasses * (dim + 1), 0.0);
  return m;
}

double loss_and_gradient(const std::vector<double>& weights, std::size_t dim, const Examples& data,
                         double l2_penalty, std::vector<double>* gradient) {
  const std::size_t width = dim + 1;
  if (gradient) {
    gradient->assign(weights.size(), 0.0);
  }
  const double n = static_cast<double>(data.labels.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    const auto& x = *data.features[i];
    auto s = scores(weights, dim, x);
    const double m = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (double v : s) {
      z += std::exp(v - m);
    }
    const double log_z = m + std::log(z);
    const auto y = static_cast<std::size_t>(data.labels[i]);
    loss += log_z - s[y];
    if (gradient) {
      for (std::size_t k = 0; k < kClasses; ++k) {
        const double r = (std::exp(s[k] - log_z) - (k == y ? 1.0 : 0.0)) / n;
        double* g = gradient->data() + k * width;
        for (std::size_t j = 0; j < dim; ++j) {
          g[j] += r * x[j];
        }
        g[dim] += r;
      }
    }
  }
  loss = n > 0 ? loss / n : 0.0;
  double reg = 0.0;
  for (std::size_t k = 0; k < kClasses; ++k) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double w = weights[k * width + j];
      reg += w * w;
      if (gradient) {
        (*gradient)[k * width + j] += 2.0 * l2_penalty * w;
      }
    }
  }
  return loss + l2_penalty * reg;
}

SoftmaxModel train_softmax(const repr::VectorSet& vectors, const std::map<ItemKey, int>& gold,
                           const corpus::SplitAssignment& split, const TrainConfig& config) {
  if (!(config.learning_rate > 0.0) || config.l2_penalty < 0.0 || !(config.tolerance > 0.0)) {
    throw Error(Errc::invalid_argument, "train config needs learning_rate > 0, l2_penalty >= 0, tolerance > 0");
  }
  const auto train = gather(vectors, gold, split.members(corpus::Partition::train), "train");
  const auto dev = gather(vectors, gold, split.members(corpus::Partition::dev), "dev");
  if (train.labels.empty()) {
    throw Error(Errc::invalid_argument, "train partition is empty");
  }
  const std::size_t dim = vectors.dim();
  SoftmaxModel model = SoftmaxModel::zeros(dim);
  Rng rng(derive_seed(config.seed, "softmax-init"));
  for (auto& w : model.weights) {
    w = rng.uniform(-1e-3, 1e-3);
  }

  std::vector<double> grad;
  std::vector<double> candidate(model.weights.size());
  double loss = loss_and_gradient(model.weights, dim, train, config.l2_penalty, &grad);
  double step = config.learning_rate;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    double next_loss = 0.0;
    bool moved = false;
    // Halve until the step does not increase the loss; the halving count is
    // bounded because the step eventually underflows relative to the weights.
    for (int halvings = 0; halvings < 200; ++halvings) {
      for (std::size_t i = 0; i < candidate.size(); ++i) {
        candidate[i] = model.weights[i] - step * grad[i];
      }
      next_loss = loss_and_gradient(candidate, dim, train, config.l2_penalty, nullptr);
      if (next_loss <= loss) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    model.epochs_run = epoch + 1;
    if (!moved) {
      break;
    }
    model.weights.swap(candidate);
    const double delta = loss - next_loss;
    loss = loss_and_gradient(model.weights, dim, train, config.l2_penalty, &grad);
    if (!dev.labels.empty()) {
      model.dev_accuracy.push_back(accuracy_of(model.weights, dim, dev));
    }
    if (delta < config.tolerance) {
      break;
    }
  }
  model.final_loss = loss;
  return model;
}

Prediction predict_one(const SoftmaxModel& model, const std::vector<double>& features) {
  if (features.size() != model.dim) {
    throw Error(Errc::invalid_argument, "feature dimension " + std::to_string(features.size()) +
                                            " does not match model dimension " + std::to_string(model.dim));
  }
  Prediction p;
  p.probabilities = softmax(scores(model.weights, model.dim, features));
  // First maximum: ties go to the lowest class index.
  p.label = static_cast<int>(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                             p.probabilities.begin());
  return p;
}

std::map<ItemKey, Prediction> predict(const SoftmaxModel& model, const repr::VectorSet& vectors) {
  if (vectors.dim() != model.dim) {
    throw Error(Errc::invalid_argument, "vector dimension " + std::to_string(vectors.dim()) +
                                            " does not match model dimension " + std::to_string(model.dim));
  }
  std::map<ItemKey, Prediction> out;
  for (const auto& [key, v] : vectors.entries()) {
    out.emplace(key, predict_one(model, v));
  }
  return out;
}

Evaluation evaluate(const SoftmaxModel& model, const repr::VectorSet& vectors, const std::map<ItemKey, int>& gold,
                    const std::vector<ItemKey>& items) {
  if (items.empty()) {
    throw Error(Errc::invalid_argument, "cannot evaluate on an empty partition");
  }
  auto ex = gather(vectors, gold, items, "evaluation");
  std::vector<int> predicted;
  predicted.reserve(items.size());
  for (const auto* f : ex.features) {
    predicted.push_back(predict_one(model, *f).label);
  }
  Evaluation e;
  e.n_items = items.size();
  e.confusion = agreement::confusion_matrix(ex.labels, predicted, kClasses);
  e.accuracy = static_cast<double>(e.confusion.trace()) / static_cast<double>(e.n_items);
  return e;
}

std::vector<corpus::ScoreRecord> as_rater(const std::map<ItemKey, Prediction>& predictions,
                                          const std::string& rater_id, const std::string& epoch) {
  std::vector<corpus::ScoreRecord> out;
  out.reserve(predictions.size());
  for (const auto& [key, p] : predictions) {
    out.push_back({rater_id, key.student_id, key.task_id, p.label, epoch});
  }
  return out;
}

std::string model_to_json(const SoftmaxModel& model) {
  nlohmann::ordered_json doc;
  doc["dim"] = model.dim;
  doc["K"] = kClasses;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < kClasses; ++k) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j <= model.dim; ++j) {
      row.push_back(model.weights[k * (model.dim + 1) + j]);
    }
    rows.push_back(row);
  }
  doc["weights"] = rows;
  doc["epochs_run"] = model.epochs_run;
  doc["final_loss"] = model.final_loss;
  return doc.dump(2);
}

SoftmaxModel model_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::parse, std::string("model file: ") + e.what());
  }
  try {
    if (doc.at("K").get<int>() != kClasses) {
      throw Error(Errc::invalid_argument, "model file: expected K = 3");
    }
    SoftmaxModel m = SoftmaxModel::zeros(doc.at("dim").get<std::size_t>());
    const auto& rows = doc.at("weights");
    if (rows.size() != kClasses) {
      throw Error(Errc::parse, "model file: expected 3 weight rows");
    }
    for (std::size_t k = 0; k < kClasses; ++k) {
      if (rows[k].size() != m.dim + 1) {
        throw Error(Errc::parse, "model file: weight row has wrong length");
      }
      for (std::size_t j = 0; j <= m.dim; ++j) {
        m.weights[k * (m.dim + 1) + j] = rows[k][j].get<double>();
      }
    }
    m.epochs_run = doc.value("epochs_run", std::size_t{0});
    m.final_loss = doc.value("final_loss", 0.0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("model file: ") + e.what());
  }
}

void write_predictions(std::ostream& out, const std::map<ItemKey, Prediction>& predictions) {
  out << "student_id,task_id,label,p0,p1,p2\n";
  for (const auto& [key, p] : predictions) {
    out << csv::join({key.student_id, key.task_id, std::to_string(p.label), format_double(p.probabilities[0]),
                      format_double(p.probabilities[1]), format_double(p.probabilities[2])})
        << '\n';
  }
}

}  // namespace raterkit::classifier
