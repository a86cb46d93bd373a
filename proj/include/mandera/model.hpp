#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mandera/dataset.hpp"

namespace mandera {

/// Differentiable classifier over a flat parameter vector. The flattening
/// order is part of the contract and stays fixed for a run.
class Model {
 public:
  virtual ~Model() = default;
  virtual std::int64_t param_count() const = 0;
  virtual std::string name() const = 0;

  /// Mean cross-entropy loss over the selected samples; adds nothing to grad
  /// if grad is empty, otherwise writes the mean gradient (size param_count).
  virtual double loss_and_gradient(std::span<const double> params, const Dataset& data,
                                   std::span<const std::int64_t> samples,
                                   std::span<double> grad) const = 0;

  /// Initial parameters (deterministic per seed).
  virtual std::vector<double> init_params(std::uint64_t seed) const = 0;

  double accuracy(std::span<const double> params, const Dataset& data) const;
  virtual int predict(std::span<const double> params, std::span<const double> x) const = 0;
};

/// Softmax regression: W (K x d) then bias (K); p = d*K + K.
std::unique_ptr<Model> make_softmax_model(int d, int num_classes);

/// One hidden tanh layer of width h: W1 (h x d), b1, W2 (K x h), b2.
std::unique_ptr<Model> make_mlp_model(int d, int hidden, int num_classes);

/// Average gradient of the model loss over the given samples of a node's
/// data. Throws on an empty batch.
std::vector<double> node_gradient(const Model& model, std::span<const double> params,
                                  const Dataset& data, std::span<const std::int64_t> samples);

}  // namespace mandera
