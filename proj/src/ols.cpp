#include <string>

#include "permtest/models.hpp"

namespace permtest {

std::string RegressorSpec::name() const {
  if (kind == ModelKind::Ols) return "ols";
  std::string out = "mlp(";
  for (std::size_t i = 0; i < mlp_layers.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(mlp_layers[i]);
  }
  return out + ")";
}

void RegressorSpec::validate() const {
  if (kind == ModelKind::Ols) return;
  if (mlp_layers.empty()) throw Error(ErrorKind::InvalidConfig, "MLP needs at least one hidden layer");
  for (auto w : mlp_layers) {
    if (w == 0) throw Error(ErrorKind::InvalidConfig, "hidden layer width must be positive");
  }
  if (mlp_epochs == 0) throw Error(ErrorKind::InvalidConfig, "mlp_epochs must be positive");
  if (!(mlp_learning_rate > 0.0)) throw Error(ErrorKind::InvalidConfig, "mlp_learning_rate must be positive");
}

FittedModel ols_fit(const Matrix& x, const Vector& y) {
  if (x.rows() != y.size()) throw Error(ErrorKind::DimensionMismatch, "design rows != response length");
  Matrix design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;

  FittedModel model;
  model.kind = ModelKind::Ols;
  model.input_dim = static_cast<std::size_t>(x.cols());
  model.parameters = Eigen::CompleteOrthogonalDecomposition<Matrix>(design).solve(y);
  return model;
}

FittedModel ols_fit(const Dataset& data) { return ols_fit(data.predictors(), data.responses()); }

FittedModel fit(const RegressorSpec& spec, const Matrix& x, const Vector& y, RandomStream fit_stream) {
  if (spec.kind == ModelKind::Ols) return ols_fit(x, y);
  return mlp_fit(x, y, spec, fit_stream);
}

Vector predict(const FittedModel& model, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != model.input_dim) {
    throw Error(ErrorKind::DimensionMismatch, "model trained on " + std::to_string(model.input_dim) +
                                                  " predictors, got " + std::to_string(x.cols()));
  }
  if (model.kind == ModelKind::Ols) {
    const auto d = static_cast<Eigen::Index>(model.input_dim);
    return (x * model.parameters.tail(d)).array() + model.parameters(0);
  }

  const auto& s = model.scaling;
  Matrix scaled = (x.rowwise() - s.x_mean.transpose()).array().rowwise() / s.x_scale.transpose().array();
  const mlp::Layout layout{model.input_dim, model.hidden_layers};
  Vector out = mlp::forward(layout, model.parameters, scaled);
  return (out.array() * s.y_scale + s.y_mean).matrix();
}

}  // namespace permtest
