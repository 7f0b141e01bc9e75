#include "robias/mlp.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "robias/error.hpp"
#include "robias/rng.hpp"

namespace robias {
namespace {

int argmax(const Vector& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return best;
}

Vector softmax(const Vector& z) {
  const Vector e = (z.array() - z.maxCoeff()).exp().matrix();
  return e / e.sum();
}

// Row-wise log-sum-exp minus the true-class logit.
double cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    total += lse - logits(i, labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(logits.rows());
}

struct Forward {
  std::vector<Matrix> pre;   // pre-activations per layer
  std::vector<Matrix> post;  // post[0] = inputs, post[l+1] = activation of layer l
};

Forward forward_batch(const std::vector<DenseLayer>& layers, const Matrix& inputs) {
  Forward f;
  f.post.push_back(inputs);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z = f.post.back() * layers[l].weights.transpose();
    z.rowwise() += layers[l].bias.transpose();
    f.pre.push_back(z);
    if (l + 1 < layers.size()) {
      f.post.push_back(z.cwiseMax(0.0));
    }
  }
  return f;
}

Vector forward_logits(const std::vector<DenseLayer>& layers, const Vector& x) {
  Vector a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Vector z = layers[l].weights * a + layers[l].bias;
    a = (l + 1 < layers.size()) ? Vector(z.cwiseMax(0.0)) : z;
  }
  return a;
}

void check_input(const Mlp& m, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != m.input_dim()) {
    throw ArgumentError("mlp: input has " + std::to_string(x.size()) + " features, model expects " +
                        std::to_string(m.input_dim()));
  }
}

}  // namespace

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.size() < 2) throw ArgumentError("mlp: need at least one hidden layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.bias.size() != layer.weights.rows()) {
      throw ArgumentError("mlp: bias size mismatch in layer " + std::to_string(l));
    }
    if (l > 0 && layer.weights.cols() != layers_[l - 1].weights.rows()) {
      throw ArgumentError("mlp: layer " + std::to_string(l) + " input width mismatch");
    }
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      throw ArgumentError("mlp: non-finite parameter in layer " + std::to_string(l));
    }
  }
}

std::size_t Mlp::input_dim() const {
  return static_cast<std::size_t>(layers_.front().weights.cols());
}

std::size_t Mlp::num_classes() const {
  return static_cast<std::size_t>(layers_.back().weights.rows());
}

std::vector<std::size_t> Mlp::layer_sizes() const {
  std::vector<std::size_t> sizes{input_dim()};
  for (const auto& l : layers_) sizes.push_back(static_cast<std::size_t>(l.weights.rows()));
  return sizes;
}

Prediction Mlp::predict(const Vector& x) const {
  check_input(*this, x);
  Prediction p;
  p.probabilities = softmax(forward_logits(layers_, x));
  p.label = argmax(p.probabilities);
  return p;
}

int Mlp::classify(const Vector& x) const {
  check_input(*this, x);
  return argmax(forward_logits(layers_, x));
}

Vector Mlp::input_gradient(const Vector& x, int true_class) const {
  check_input(*this, x);
  if (true_class < 0 || static_cast<std::size_t>(true_class) >= num_classes()) {
    throw ArgumentError("mlp: class index out of range");
  }
  std::vector<Vector> pre;
  Vector a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Vector z = layers_[l].weights * a + layers_[l].bias;
    pre.push_back(z);
    a = (l + 1 < layers_.size()) ? Vector(z.cwiseMax(0.0)) : z;
  }
  Vector delta = softmax(pre.back());
  delta[true_class] -= 1.0;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    Vector upstream = layers_[l].weights.transpose() * delta;
    if (l == 0) return upstream;
    delta = (pre[l - 1].array() > 0.0).select(upstream, 0.0);
  }
  return delta;  // unreachable
}

double Mlp::loss(const Matrix& inputs, const std::vector<int>& labels) const {
  const Forward f = forward_batch(layers_, inputs);
  return cross_entropy(f.pre.back(), labels);
}

double Mlp::loss_and_gradients(const Matrix& inputs, const std::vector<int>& labels,
                               std::vector<DenseLayer>& grads) const {
  const Forward f = forward_batch(layers_, inputs);
  const double loss = cross_entropy(f.pre.back(), labels);
  const auto n = static_cast<double>(inputs.rows());

  // dL/dlogits = (softmax - onehot) / n
  Matrix delta = f.pre.back();
  for (Eigen::Index i = 0; i < delta.rows(); ++i) {
    const double m = delta.row(i).maxCoeff();
    delta.row(i) = (delta.row(i).array() - m).exp().matrix();
    delta.row(i) /= delta.row(i).sum();
    delta(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  }
  delta /= n;

  grads.resize(layers_.size());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    grads[l].weights = delta.transpose() * f.post[l];
    grads[l].bias = delta.colwise().sum().transpose();
    if (l == 0) break;
    Matrix upstream = delta * layers_[l].weights;
    delta = (f.pre[l - 1].array() > 0.0).select(upstream, 0.0);
  }
  return loss;
}

Mlp init_mlp(const MlpSpec& spec) {
  if (spec.layer_sizes.size() < 3) {
    throw ArgumentError("init_mlp: need input, at least one hidden, and output sizes");
  }
  for (std::size_t s : spec.layer_sizes) {
    if (s == 0) throw ArgumentError("init_mlp: zero-width layer");
  }
  Rng rng(spec.init_seed);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const auto fan_in = spec.layer_sizes[l];
    const auto fan_out = spec.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer;
    layer.weights.resize(static_cast<Eigen::Index>(fan_out), static_cast<Eigen::Index>(fan_in));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = rng.uniform(-limit, limit);
      }
    }
    layer.bias = Vector::Zero(static_cast<Eigen::Index>(fan_out));
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

int TrainSchedule::total_epochs() const {
  int total = 0;
  for (const auto& p : phases) total += p.epochs;
  return total;
}

void TrainSchedule::validate() const {
  if (phases.empty()) throw ArgumentError("train schedule: no phases");
  for (const auto& p : phases) {
    if (!(p.learning_rate > 0.0)) throw ArgumentError("train schedule: learning rate must be > 0");
    if (p.epochs < 1) throw ArgumentError("train schedule: epochs must be >= 1");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ArgumentError("train schedule: validation_fraction must be in [0, 1)");
  }
}

TrainSchedule TrainSchedule::scaled(double factor) const {
  TrainSchedule out = *this;
  for (auto& p : out.phases) {
    p.epochs = std::max(1, static_cast<int>(std::lround(p.epochs * factor)));
  }
  return out;
}

TrainResult train(Mlp model, const Dataset& train_set, const TrainSchedule& schedule,
                  std::uint64_t seed, const Dataset* test_set) {
  schedule.validate();
  if (train_set.empty()) throw ArgumentError("train: empty training set");
  if (train_set.dims() != model.input_dim() || train_set.num_classes() != model.num_classes()) {
    throw ArgumentError("train: dataset shape does not match the model");
  }

  Dataset fit_set = train_set;
  std::optional<Dataset> holdout;
  if (schedule.validation_fraction > 0.0) {
    auto split = split_stratified(train_set, 1.0 - schedule.validation_fraction, seed);
    fit_set = std::move(split.train);
    holdout = std::move(split.test);
  }

  TrainReport report;
  std::vector<DenseLayer> grads;
  int epoch = 0;
  for (const auto& phase : schedule.phases) {
    for (int e = 0; e < phase.epochs; ++e, ++epoch) {
      const double loss = model.loss_and_gradients(fit_set.features(), fit_set.labels(), grads);
      if (!std::isfinite(loss)) {
        throw TrainingError("train: loss became non-finite at epoch " + std::to_string(epoch));
      }
      report.losses.push_back(loss);
      auto& layers = model.mutable_layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].weights -= phase.learning_rate * grads[l].weights;
        layers[l].bias -= phase.learning_rate * grads[l].bias;
      }
    }
  }
  for (const auto& layer : model.layers()) {
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      throw TrainingError("train: parameters became non-finite at epoch " + std::to_string(epoch));
    }
  }

  report.train_accuracy = accuracy(model, train_set);
  if (holdout && !holdout->empty()) report.validation_accuracy = accuracy(model, *holdout);
  if (test_set != nullptr) report.test_accuracy = accuracy(model, *test_set);
  return {std::move(model), std::move(report)};
}

double accuracy(const Mlp& model, const Dataset& ds) {
  if (ds.empty()) throw ArgumentError("accuracy: empty dataset");
  if (ds.dims() != model.input_dim()) throw ArgumentError("accuracy: feature count mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    if (model.classify(ds.row(i)) == ds.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.rows());
}

// JSON document: {"layer_sizes": [...], "hidden_activation": "relu",
// "output": "softmax", "layers": [{"rows", "cols", "weights" (row-major), "bias"}]}
nlohmann::json mlp_to_json(const Mlp& model) {
  nlohmann::json doc;
  doc["layer_sizes"] = model.layer_sizes();
  doc["hidden_activation"] = "relu";
  doc["output"] = "softmax";
  doc["layers"] = nlohmann::json::array();
  for (const auto& l : model.layers()) {
    std::vector<double> w(l.weights.data(), l.weights.data() + l.weights.size());
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    doc["layers"].push_back({{"rows", l.weights.rows()},
                             {"cols", l.weights.cols()},
                             {"weights", w},
                             {"bias", b}});
  }
  return doc;
}

Mlp mlp_from_json(const nlohmann::json& doc) {
  try {
    std::vector<DenseLayer> layers;
    for (const auto& jl : doc.at("layers")) {
      const auto rows = jl.at("rows").get<Eigen::Index>();
      const auto cols = jl.at("cols").get<Eigen::Index>();
      const auto w = jl.at("weights").get<std::vector<double>>();
      const auto b = jl.at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != rows * cols ||
          static_cast<Eigen::Index>(b.size()) != rows) {
        throw ArgumentError("mlp json: parameter count mismatch");
      }
      DenseLayer layer;
      layer.weights = Eigen::Map<const Matrix>(w.data(), rows, cols);
      layer.bias = Eigen::Map<const Vector>(b.data(), rows);
      layers.push_back(std::move(layer));
    }
    return Mlp(std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("mlp json: ") + e.what());
  }
}

void save_mlp(const Mlp& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << mlp_to_json(model).dump(1) << '\n';
}

Mlp load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return mlp_from_json(doc);
}

}  // namespace robias
