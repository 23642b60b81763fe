#include "wearauth/identify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "wearauth/errors.hpp"
#include "wearauth/rng.hpp"

namespace wearauth::identify {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct ForwardPass {
  // activations[0] is the input; activations.back() is the softmax output.
  std::vector<std::vector<double>> activations;
};

ForwardPass forward(const MlpModel& model, const std::vector<double>& x) {
  ForwardPass fp;
  fp.activations.push_back(x);
  const std::size_t n_layers = model.weights.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t in = model.layer_sizes[l];
    const std::size_t out = model.layer_sizes[l + 1];
    const std::vector<double>& prev = fp.activations.back();
    std::vector<double> z(out);
    for (std::size_t o = 0; o < out; ++o) {
      double acc = model.biases[l][o];
      const double* wrow = model.weights[l].data() + o * in;
      for (std::size_t i = 0; i < in; ++i) acc += wrow[i] * prev[i];
      z[o] = acc;
    }
    if (l + 1 < n_layers) {
      for (double& v : z) v = sigmoid(v);
    } else {
      // softmax with the usual max shift
      const double zmax = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (double& v : z) {
        v = std::exp(v - zmax);
        sum += v;
      }
      for (double& v : z) v /= sum;
    }
    fp.activations.push_back(std::move(z));
  }
  return fp;
}

void check_labels(const MlpModel& model,
                  const std::vector<std::vector<double>>& X,
                  const std::vector<int>& y) {
  if (X.size() != y.size()) {
    throw LabelMismatch(std::to_string(X.size()) + " samples vs " +
                        std::to_string(y.size()) + " labels");
  }
  const auto k = static_cast<int>(model.n_classes());
  if (X.size() < model.n_classes()) {
    throw LabelMismatch("fewer samples than classes");
  }
  std::vector<std::size_t> counts(model.n_classes(), 0);
  for (int label : y) {
    if (label < 0 || label >= k) {
      throw LabelMismatch("label " + std::to_string(label) +
                          " outside 0.." + std::to_string(k - 1));
    }
    ++counts[static_cast<std::size_t>(label)];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) throw DegenerateClasses(c);
  }
  for (const auto& row : X) {
    if (row.size() != model.n_inputs()) {
      throw ShapeMismatch(row.size(), model.n_inputs());
    }
  }
}

}  // namespace

MlpModel mlp_init(const std::vector<std::size_t>& layer_sizes,
                  std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw BadLayout("need at least two layers");
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw BadLayout("zero-size layer");
  }

  MlpModel model;
  model.layer_sizes = layer_sizes;
  model.seed = seed;
  Rng rng(derive_seed(seed, 0x111ULL));
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const std::size_t in = layer_sizes[l];
    const std::size_t out = layer_sizes[l + 1];
    std::vector<double> w(in * out);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& v : w) v = rng.uniform(-bound, bound);
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(out, 0.0);
  }
  return model;
}

std::vector<double> mlp_predict(const MlpModel& model,
                                const std::vector<double>& x) {
  if (x.size() != model.n_inputs()) {
    throw ShapeMismatch(x.size(), model.n_inputs());
  }
  return forward(model, x).activations.back();
}

Gradients mlp_gradients(const MlpModel& model,
                        const std::vector<std::vector<double>>& X,
                        const std::vector<int>& y) {
  const std::size_t n_layers = model.weights.size();
  Gradients g;
  g.weights.resize(n_layers);
  g.biases.resize(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    g.weights[l].assign(model.weights[l].size(), 0.0);
    g.biases[l].assign(model.biases[l].size(), 0.0);
  }

  const double inv_n = 1.0 / static_cast<double>(X.size());
  for (std::size_t s = 0; s < X.size(); ++s) {
    const ForwardPass fp = forward(model, X[s]);
    const std::vector<double>& probs = fp.activations.back();
    const auto label = static_cast<std::size_t>(y[s]);
    g.loss -= std::log(std::max(probs[label], 1e-300));

    // softmax + cross-entropy collapses to (p - onehot)
    std::vector<double> delta(probs);
    delta[label] -= 1.0;

    for (std::size_t l = n_layers; l-- > 0;) {
      const std::size_t in = model.layer_sizes[l];
      const std::size_t out = model.layer_sizes[l + 1];
      const std::vector<double>& prev = fp.activations[l];
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta[o] * inv_n;
        g.biases[l][o] += d;
        double* grow = g.weights[l].data() + o * in;
        for (std::size_t i = 0; i < in; ++i) grow[i] += d * prev[i];
      }
      if (l == 0) break;
      std::vector<double> prev_delta(in, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta[o];
        const double* wrow = model.weights[l].data() + o * in;
        for (std::size_t i = 0; i < in; ++i) prev_delta[i] += wrow[i] * d;
      }
      for (std::size_t i = 0; i < in; ++i) {
        prev_delta[i] *= prev[i] * (1.0 - prev[i]);  // sigmoid'
      }
      delta = std::move(prev_delta);
    }
  }
  g.loss *= inv_n;
  return g;
}

TrainResult mlp_train(MlpModel model, const std::vector<std::vector<double>>& X,
                      const std::vector<int>& y, const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw Error("epochs must be >= 1");
  check_labels(model, X, y);

  std::vector<std::vector<double>> vel_w(model.weights.size());
  std::vector<std::vector<double>> vel_b(model.biases.size());
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    vel_w[l].assign(model.weights[l].size(), 0.0);
    vel_b[l].assign(model.biases[l].size(), 0.0);
  }

  TrainResult result;
  result.loss_history.reserve(cfg.epochs + 1);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Gradients g = mlp_gradients(model, X, y);
    result.loss_history.push_back(g.loss);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      for (std::size_t i = 0; i < model.weights[l].size(); ++i) {
        vel_w[l][i] = cfg.momentum * vel_w[l][i] -
                      cfg.learning_rate * g.weights[l][i];
        model.weights[l][i] += vel_w[l][i];
      }
      for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
        vel_b[l][i] = cfg.momentum * vel_b[l][i] -
                      cfg.learning_rate * g.biases[l][i];
        model.biases[l][i] += vel_b[l][i];
      }
    }
  }
  result.loss_history.push_back(mlp_gradients(model, X, y).loss);
  result.model = std::move(model);
  return result;
}

namespace {

struct NormBounds {
  std::vector<double> lo, hi;
};

NormBounds fit_bounds(const std::vector<std::vector<double>>& X) {
  NormBounds b;
  b.lo = X.front();
  b.hi = X.front();
  for (const auto& row : X) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      b.lo[i] = std::min(b.lo[i], row[i]);
      b.hi[i] = std::max(b.hi[i], row[i]);
    }
  }
  return b;
}

std::vector<double> apply_bounds(const NormBounds& b,
                                 const std::vector<double>& row) {
  std::vector<double> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) {
    out[i] = b.hi[i] > b.lo[i]
                 ? (std::clamp(row[i], b.lo[i], b.hi[i]) - b.lo[i]) /
                       (b.hi[i] - b.lo[i])
                 : 0.0;
  }
  return out;
}

// First k samples of each class, in dataset order.
std::vector<std::size_t> first_k_per_class(const Dataset& d, std::size_t k,
                                           std::size_t n_classes) {
  std::vector<std::size_t> taken(n_classes, 0);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < d.X.size(); ++i) {
    const auto c = static_cast<std::size_t>(d.y[i]);
    if (taken[c] < k) {
      ++taken[c];
      idx.push_back(i);
    }
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (taken[c] == 0) {
      throw InsufficientSamples("class " + std::to_string(c) +
                                " has no training samples");
    }
  }
  return idx;
}

std::size_t count_classes(const Dataset& d) {
  int max_label = -1;
  for (int label : d.y) max_label = std::max(max_label, label);
  if (max_label < 0) throw InsufficientSamples("empty dataset");
  return static_cast<std::size_t>(max_label) + 1;
}

struct EvalCounts {
  std::size_t correct = 0;
  std::vector<std::vector<std::size_t>> confusion;
};

EvalCounts eval_model(const MlpModel& model, const NormBounds& bounds,
                      const Dataset& test,
                      const std::vector<std::size_t>& indices,
                      std::size_t n_classes) {
  EvalCounts ec;
  ec.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
  for (std::size_t i : indices) {
    const auto probs = mlp_predict(model, apply_bounds(bounds, test.X[i]));
    const auto pred = static_cast<std::size_t>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
    const auto truth = static_cast<std::size_t>(test.y[i]);
    ++ec.confusion[truth][pred];
    if (pred == truth) ++ec.correct;
  }
  return ec;
}

}  // namespace

ScenarioResult run_scenario(ScenarioKind kind, const Dataset& train,
                            const Dataset& test, std::size_t k_train_per_user,
                            const TrainConfig& cfg) {
  if (k_train_per_user < 1) throw InsufficientSamples("k must be >= 1");
  const std::size_t n_classes = count_classes(train);

  const auto t0 = std::chrono::steady_clock::now();
  ScenarioResult res;
  res.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
  std::size_t correct = 0, total = 0;

  const auto train_and_eval = [&](const std::vector<std::size_t>& train_idx,
                                  const Dataset& test_set,
                                  const std::vector<std::size_t>& test_idx) {
    std::vector<std::vector<double>> Xt;
    std::vector<int> yt;
    for (std::size_t i : train_idx) {
      Xt.push_back(train.X[i]);
      yt.push_back(train.y[i]);
    }
    const NormBounds bounds = fit_bounds(Xt);
    for (auto& row : Xt) row = apply_bounds(bounds, row);

    std::vector<std::size_t> layers{train.X.front().size()};
    layers.insert(layers.end(), cfg.hidden_sizes.begin(),
                  cfg.hidden_sizes.end());
    layers.push_back(n_classes);
    const TrainResult tr = mlp_train(mlp_init(layers, cfg.seed), Xt, yt, cfg);

    const EvalCounts ec = eval_model(tr.model, bounds, test_set, test_idx,
                                     n_classes);
    correct += ec.correct;
    total += test_idx.size();
    for (std::size_t a = 0; a < n_classes; ++a) {
      for (std::size_t b = 0; b < n_classes; ++b) {
        res.confusion[a][b] += ec.confusion[a][b];
      }
    }
  };

  if (kind == ScenarioKind::CrossDataset) {
    const auto train_idx = first_k_per_class(train, k_train_per_user, n_classes);
    std::vector<std::size_t> test_idx(test.X.size());
    std::iota(test_idx.begin(), test_idx.end(), 0);
    if (test_idx.empty()) throw InsufficientSamples("empty test dataset");
    train_and_eval(train_idx, test, test_idx);
  } else {
    // Stratified 5-fold split: each user's samples are dealt round-robin
    // over folds; fold f tests while the rest (capped at k per user) train.
    constexpr std::size_t kFolds = 5;
    std::vector<std::size_t> fold_of(train.X.size());
    std::vector<std::size_t> seen(n_classes, 0);
    for (std::size_t i = 0; i < train.X.size(); ++i) {
      const auto c = static_cast<std::size_t>(train.y[i]);
      fold_of[i] = seen[c] % kFolds;
      ++seen[c];
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (seen[c] < kFolds) {
        throw InsufficientSamples("class " + std::to_string(c) +
                                  " needs >= 5 samples for 5-fold runs");
      }
    }
    for (std::size_t f = 0; f < kFolds; ++f) {
      std::vector<std::size_t> train_idx, test_idx;
      std::vector<std::size_t> taken(n_classes, 0);
      for (std::size_t i = 0; i < train.X.size(); ++i) {
        const auto c = static_cast<std::size_t>(train.y[i]);
        if (fold_of[i] == f) {
          test_idx.push_back(i);
        } else if (taken[c] < k_train_per_user) {
          ++taken[c];
          train_idx.push_back(i);
        }
      }
      train_and_eval(train_idx, train, test_idx);
    }
  }

  res.accuracy = total > 0 ? static_cast<double>(correct) /
                                 static_cast<double>(total)
                           : 0.0;
  res.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

double nearest_centroid_accuracy(const Dataset& train, const Dataset& test,
                                 std::size_t k_train_per_user) {
  const std::size_t n_classes = count_classes(train);
  const auto train_idx = first_k_per_class(train, k_train_per_user, n_classes);

  std::vector<std::vector<double>> Xt;
  std::vector<int> yt;
  for (std::size_t i : train_idx) {
    Xt.push_back(train.X[i]);
    yt.push_back(train.y[i]);
  }
  const NormBounds bounds = fit_bounds(Xt);

  const std::size_t dim = Xt.front().size();
  std::vector<std::vector<double>> centroid(n_classes,
                                            std::vector<double>(dim, 0.0));
  std::vector<std::size_t> counts(n_classes, 0);
  for (std::size_t s = 0; s < Xt.size(); ++s) {
    const auto row = apply_bounds(bounds, Xt[s]);
    const auto c = static_cast<std::size_t>(yt[s]);
    for (std::size_t i = 0; i < dim; ++i) centroid[c][i] += row[i];
    ++counts[c];
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (double& v : centroid[c]) v /= static_cast<double>(counts[c]);
  }

  std::size_t correct = 0;
  for (std::size_t s = 0; s < test.X.size(); ++s) {
    const auto row = apply_bounds(bounds, test.X[s]);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n_classes; ++c) {
      double d = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double diff = row[i] - centroid[c][i];
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (best == static_cast<std::size_t>(test.y[s])) ++correct;
  }
  return test.X.empty() ? 0.0
                        : static_cast<double>(correct) /
                              static_cast<double>(test.X.size());
}

}  // namespace wearauth::identify
