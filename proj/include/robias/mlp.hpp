#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "robias/dataset.hpp"

namespace robias {

// Layer widths from input to output: (d, h_1, ..., L). Hidden layers use ReLU,
// the output layer softmax with cross-entropy loss.
struct MlpSpec {
  std::vector<std::size_t> layer_sizes;
  std::uint64_t init_seed = 0;
};

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
};

struct Prediction {
  int label = 0;
  Vector probabilities;
};

class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<DenseLayer> layers);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }
  std::size_t input_dim() const;
  std::size_t num_classes() const;
  std::vector<std::size_t> layer_sizes() const;

  Prediction predict(const Vector& x) const;
  // Argmax only; avoids building the probability vector.
  int classify(const Vector& x) const;

  // Gradient of the cross-entropy loss at (x, true_class) with respect to x.
  Vector input_gradient(const Vector& x, int true_class) const;

  // Mean cross-entropy over the rows of `inputs`.
  double loss(const Matrix& inputs, const std::vector<int>& labels) const;

  // Mean loss and its gradient w.r.t. every weight and bias.
  double loss_and_gradients(const Matrix& inputs, const std::vector<int>& labels,
                            std::vector<DenseLayer>& grads) const;

 private:
  std::vector<DenseLayer> layers_;
};

// Glorot-uniform weights seeded by init_seed, zero biases.
Mlp init_mlp(const MlpSpec& spec);

struct TrainPhase {
  double learning_rate = 0.0;
  int epochs = 0;
};

struct TrainSchedule {
  std::vector<TrainPhase> phases;
  // Stratified hold-out used only for reporting validation accuracy.
  double validation_fraction = 0.0;

  int total_epochs() const;
  void validate() const;
  // Every phase's epochs multiplied by factor, rounded, at least 1.
  TrainSchedule scaled(double factor) const;
};

struct TrainReport {
  std::vector<double> losses;  // full-batch loss at the start of each epoch
  double train_accuracy = 0.0;
  std::optional<double> validation_accuracy;
  std::optional<double> test_accuracy;
};

struct TrainResult {
  Mlp model;
  TrainReport report;
};

// Full-batch gradient descent on mean cross-entropy, phases in order.
// `seed` drives the validation hold-out; training itself is deterministic.
TrainResult train(Mlp model, const Dataset& train_set, const TrainSchedule& schedule,
                  std::uint64_t seed, const Dataset* test_set = nullptr);

double accuracy(const Mlp& model, const Dataset& ds);

nlohmann::json mlp_to_json(const Mlp& model);
Mlp mlp_from_json(const nlohmann::json& doc);
void save_mlp(const Mlp& model, const std::filesystem::path& path);
Mlp load_mlp(const std::filesystem::path& path);

}  // namespace robias
