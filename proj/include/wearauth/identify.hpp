#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wearauth/features.hpp"

namespace wearauth::identify {

// Feedforward network with sigmoid hidden layers and a softmax output.
// Weights are stored row-major, weights[l][o * in + i] mapping layer input
// i to output o.
struct MlpModel {
  std::vector<std::size_t> layer_sizes;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  std::string activation = "sigmoid";  // hidden nonlinearity
  std::uint64_t seed = 0;

  std::size_t n_inputs() const { return layer_sizes.front(); }
  std::size_t n_classes() const { return layer_sizes.back(); }
};

struct TrainConfig {
  std::vector<std::size_t> hidden_sizes{64};
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t epochs = 500;
  std::uint64_t seed = 0;
};

// Uniform(-1,1)/sqrt(fan_in) weights, zero biases, deterministic per seed.
// Throws BadLayout for fewer than two layers or a zero-size layer.
MlpModel mlp_init(const std::vector<std::size_t>& layer_sizes,
                  std::uint64_t seed);

// Full-batch gradient descent with momentum on mean cross-entropy.
// loss_history holds epochs + 1 entries: the initial loss and the loss
// after each update. Throws LabelMismatch / DegenerateClasses.
struct TrainResult {
  MlpModel model;
  std::vector<double> loss_history;
};
TrainResult mlp_train(MlpModel model, const std::vector<std::vector<double>>& X,
                      const std::vector<int>& y, const TrainConfig& cfg);

// Class probabilities (softmax), summing to 1. Throws ShapeMismatch.
std::vector<double> mlp_predict(const MlpModel& model,
                                const std::vector<double>& x);

// Analytic full-batch gradients in the same layout as the parameters;
// exposed for finite-difference verification.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  double loss = 0.0;
};
Gradients mlp_gradients(const MlpModel& model,
                        const std::vector<std::vector<double>>& X,
                        const std::vector<int>& y);

// A labeled identification dataset; labels are dense 0..K-1 user indices.
struct Dataset {
  std::vector<std::vector<double>> X;
  std::vector<int> y;
  std::vector<std::string> class_names;
};

enum class ScenarioKind { SameDatasetCv5, CrossDataset };

struct ScenarioResult {
  double accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  double train_seconds = 0.0;
};

// SameDatasetCv5: stratified 5-fold cross-validation inside `train`
// (capping each user's training samples at k per fold); `test` is ignored.
// CrossDataset: trains on the first k samples per user of `train`, tests
// on all of `test`. Features are normalized with population bounds fit on
// the training split. Throws InsufficientSamples.
ScenarioResult run_scenario(ScenarioKind kind, const Dataset& train,
                            const Dataset& test, std::size_t k_train_per_user,
                            const TrainConfig& cfg);

// Nearest-centroid classifier on the same normalized features; the
// independent baseline the network is compared against.
double nearest_centroid_accuracy(const Dataset& train, const Dataset& test,
                                 std::size_t k_train_per_user);

}  // namespace wearauth::identify
