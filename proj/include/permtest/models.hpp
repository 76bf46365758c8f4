#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "permtest/core.hpp"

namespace permtest {

enum class ModelKind { Ols, Mlp };

/// Model class plus its training configuration. Frozen for the whole test:
/// every permutation is refit with exactly these settings.
struct RegressorSpec {
  ModelKind kind = ModelKind::Ols;
  std::vector<std::size_t> mlp_layers{30, 30, 30};
  std::size_t mlp_epochs = 500;
  double mlp_learning_rate = 0.01;

  static RegressorSpec ols() { return {}; }
  static RegressorSpec mlp(std::vector<std::size_t> layers = {30, 30, 30}, std::size_t epochs = 500,
                           double learning_rate = 0.01) {
    return {ModelKind::Mlp, std::move(layers), epochs, learning_rate};
  }

  /// "ols" or e.g. "mlp(30,30,30)".
  std::string name() const;
  void validate() const;

  friend bool operator==(const RegressorSpec&, const RegressorSpec&) = default;
};

struct Standardization {
  Vector x_mean;
  Vector x_scale;
  double y_mean = 0.0;
  double y_scale = 1.0;
};

struct FittedModel {
  ModelKind kind = ModelKind::Ols;
  std::size_t input_dim = 0;
  // OLS: [intercept, beta_1..beta_d]. MLP: per layer, the in x out weight
  // block (column-major) followed by out biases; output layer last.
  Vector parameters;
  std::vector<std::size_t> hidden_layers;  // MLP only
  Standardization scaling;                 // MLP only
  double initial_loss = 0.0;               // MLP only, standardized MSE
  double final_loss = 0.0;                 // MLP only, standardized MSE
};

/// Minimum-norm least squares for [1 | X] theta ~ y through a complete
/// orthogonal decomposition; rank-deficient designs do not throw.
FittedModel ols_fit(const Dataset& data);
FittedModel ols_fit(const Matrix& x, const Vector& y);

/// Full-batch gradient descent on mean squared error for exactly
/// spec.mlp_epochs steps. Inputs and response are standardized internally.
/// Throws Error{DivergedTraining} when the loss becomes non-finite.
FittedModel mlp_fit(const Dataset& data, const RegressorSpec& spec, RandomStream fit_stream);
FittedModel mlp_fit(const Matrix& x, const Vector& y, const RegressorSpec& spec, RandomStream fit_stream);

FittedModel fit(const RegressorSpec& spec, const Matrix& x, const Vector& y, RandomStream fit_stream);

/// Throws Error{DimensionMismatch} if x.cols() differs from the training dimension.
Vector predict(const FittedModel& model, const Matrix& x);

namespace mlp {

/// Architecture of a ReLU network with a single linear output unit.
struct Layout {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden;

  std::size_t parameter_count() const;
};

/// Glorot-uniform weights, zero biases.
Vector init_parameters(const Layout& layout, RandomStream& stream);

Vector forward(const Layout& layout, const Vector& params, const Matrix& x);

double loss(const Layout& layout, const Vector& params, const Matrix& x, const Vector& y);

/// Mean squared error and its gradient by backpropagation.
double loss_and_gradient(const Layout& layout, const Vector& params, const Matrix& x, const Vector& y,
                         Vector& gradient);

}  // namespace mlp

}  // namespace permtest
