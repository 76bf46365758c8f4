#include <cmath>
#include <numeric>

#include "permtest/models.hpp"

namespace permtest {
namespace mlp {

namespace {

using ConstMatrixMap = Eigen::Map<const Matrix>;
using ConstVectorMap = Eigen::Map<const Vector>;

std::vector<std::size_t> widths_of(const Layout& layout) {
  std::vector<std::size_t> widths;
  widths.reserve(layout.hidden.size() + 2);
  widths.push_back(layout.input_dim);
  widths.insert(widths.end(), layout.hidden.begin(), layout.hidden.end());
  widths.push_back(1);
  return widths;
}

// Reusable buffers for forward/backward passes over a fixed architecture.
class Network {
 public:
  explicit Network(const Layout& layout) : widths_(widths_of(layout)) {
    const std::size_t layers = widths_.size() - 1;
    offsets_.resize(layers);
    std::size_t offset = 0;
    for (std::size_t l = 0; l < layers; ++l) {
      offsets_[l] = offset;
      offset += widths_[l] * widths_[l + 1] + widths_[l + 1];
    }
    pre_.resize(layers);
    post_.resize(layers);
  }

  std::size_t layers() const { return widths_.size() - 1; }

  ConstMatrixMap weights(const Vector& params, std::size_t l) const {
    return {params.data() + offsets_[l], static_cast<Eigen::Index>(widths_[l]),
            static_cast<Eigen::Index>(widths_[l + 1])};
  }
  ConstVectorMap biases(const Vector& params, std::size_t l) const {
    return {params.data() + offsets_[l] + widths_[l] * widths_[l + 1], static_cast<Eigen::Index>(widths_[l + 1])};
  }

  // Leaves pre-activations and ReLU outputs cached; returns the output column.
  const Matrix& run_forward(const Vector& params, const Matrix& x) {
    const Matrix* input = &x;
    for (std::size_t l = 0; l < layers(); ++l) {
      pre_[l].noalias() = *input * weights(params, l);
      pre_[l].rowwise() += biases(params, l).transpose();
      if (l + 1 < layers()) {
        post_[l] = pre_[l].cwiseMax(0.0);
        input = &post_[l];
      }
    }
    return pre_.back();
  }

  double run(const Vector& params, const Matrix& x, const Vector& y, Vector* gradient) {
    const Matrix& out = run_forward(params, x);
    const double n = static_cast<double>(x.rows());
    residual_ = out.col(0) - y;
    const double value = residual_.squaredNorm() / n;
    if (!gradient) return value;

    gradient->resize(static_cast<Eigen::Index>(offsets_.back() + widths_[layers() - 1] + 1));
    delta_ = residual_ * (2.0 / n);
    for (std::size_t l = layers(); l-- > 0;) {
      const Matrix& input = l == 0 ? x : post_[l - 1];
      const auto in = static_cast<Eigen::Index>(widths_[l]);
      const auto outw = static_cast<Eigen::Index>(widths_[l + 1]);
      Eigen::Map<Matrix> gw(gradient->data() + offsets_[l], in, outw);
      Eigen::Map<Vector> gb(gradient->data() + offsets_[l] + widths_[l] * widths_[l + 1], outw);
      gw.noalias() = input.transpose() * delta_;
      gb = delta_.colwise().sum().transpose();
      if (l > 0) {
        back_.noalias() = delta_ * weights(params, l).transpose();
        delta_ = back_.cwiseProduct((pre_[l - 1].array() > 0.0).cast<double>().matrix());
      }
    }
    return value;
  }

 private:
  std::vector<std::size_t> widths_;
  std::vector<std::size_t> offsets_;
  std::vector<Matrix> pre_;
  std::vector<Matrix> post_;
  Vector residual_;
  Matrix delta_;
  Matrix back_;
};

}  // namespace

std::size_t Layout::parameter_count() const {
  const auto widths = widths_of(*this);
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) count += widths[l] * widths[l + 1] + widths[l + 1];
  return count;
}

Vector init_parameters(const Layout& layout, RandomStream& stream) {
  const auto widths = widths_of(layout);
  Vector params = Vector::Zero(static_cast<Eigen::Index>(layout.parameter_count()));
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto fan_in = static_cast<double>(widths[l]);
    const auto fan_out = static_cast<double>(widths[l + 1]);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    const auto count = static_cast<Eigen::Index>(widths[l] * widths[l + 1]);
    for (Eigen::Index i = 0; i < count; ++i) params(offset + i) = (2.0 * stream.uniform() - 1.0) * limit;
    offset += count + static_cast<Eigen::Index>(widths[l + 1]);
  }
  return params;
}

Vector forward(const Layout& layout, const Vector& params, const Matrix& x) {
  Network net(layout);
  return net.run_forward(params, x).col(0);
}

double loss(const Layout& layout, const Vector& params, const Matrix& x, const Vector& y) {
  Network net(layout);
  return net.run(params, x, y, nullptr);
}

double loss_and_gradient(const Layout& layout, const Vector& params, const Matrix& x, const Vector& y,
                         Vector& gradient) {
  Network net(layout);
  return net.run(params, x, y, &gradient);
}

}  // namespace mlp

namespace {

// Population sd; constant columns keep scale 1 so they map to zero.
double scale_of(const Vector& v, double mean) {
  const double var = (v.array() - mean).square().mean();
  const double sd = std::sqrt(var);
  return sd > 1e-12 ? sd : 1.0;
}

}  // namespace

FittedModel mlp_fit(const Matrix& x, const Vector& y, const RegressorSpec& spec, RandomStream fit_stream) {
  if (spec.kind != ModelKind::Mlp) throw Error(ErrorKind::InvalidConfig, "mlp_fit requires an MLP spec");
  spec.validate();
  if (x.rows() != y.size()) throw Error(ErrorKind::DimensionMismatch, "design rows != response length");

  FittedModel model;
  model.kind = ModelKind::Mlp;
  model.input_dim = static_cast<std::size_t>(x.cols());
  model.hidden_layers = spec.mlp_layers;

  Standardization& s = model.scaling;
  s.x_mean = x.colwise().mean().transpose();
  s.x_scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) s.x_scale(j) = scale_of(x.col(j), s.x_mean(j));
  s.y_mean = y.mean();
  s.y_scale = scale_of(y, s.y_mean);

  const Matrix xs = (x.rowwise() - s.x_mean.transpose()).array().rowwise() / s.x_scale.transpose().array();
  const Vector ys = (y.array() - s.y_mean) / s.y_scale;

  const mlp::Layout layout{model.input_dim, spec.mlp_layers};
  Vector params = mlp::init_parameters(layout, fit_stream);
  Vector gradient;
  mlp::Network net(layout);

  for (std::size_t epoch = 0; epoch < spec.mlp_epochs; ++epoch) {
    const double value = net.run(params, xs, ys, &gradient);
    if (!std::isfinite(value) || !gradient.allFinite()) {
      throw Error(ErrorKind::DivergedTraining, "loss became non-finite at epoch " + std::to_string(epoch));
    }
    if (epoch == 0) model.initial_loss = value;
    params.noalias() -= spec.mlp_learning_rate * gradient;
  }
  model.final_loss = net.run(params, xs, ys, nullptr);
  if (!std::isfinite(model.final_loss) || !params.allFinite()) {
    throw Error(ErrorKind::DivergedTraining, "loss became non-finite after the final step");
  }
  model.parameters = std::move(params);
  return model;
}

FittedModel mlp_fit(const Dataset& data, const RegressorSpec& spec, RandomStream fit_stream) {
  return mlp_fit(data.predictors(), data.responses(), spec, fit_stream);
}

}  // namespace permtest
