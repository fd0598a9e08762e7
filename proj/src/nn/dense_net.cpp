#include "fishrect/nn/dense_net.hpp"

#include <atomic>
#include <cmath>

namespace fishrect::nn {

namespace {

std::uint64_t next_revision() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation a) {
  if (a == Activation::Linear) return z;
  return z.unaryExpr([](double v) { return v > 0 ? v : kLeakySlope * v; });
}

Eigen::MatrixXd activation_derivative(const Eigen::MatrixXd& z, Activation a) {
  if (a == Activation::Linear) return Eigen::MatrixXd::Ones(z.rows(), z.cols());
  return z.unaryExpr([](double v) { return v > 0 ? 1.0 : kLeakySlope; });
}

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, what);
  }
}

void require_nonempty(const Eigen::MatrixXd& m) {
  if (m.size() == 0) throw Error(ErrorKind::EmptyBatch, "score batch is empty");
}

}  // namespace

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.bias.size() != l.weight.rows()) {
      throw Error(ErrorKind::DimensionMismatch, "bias length differs from layer width");
    }
    if (i > 0 && l.weight.cols() != layers_[i - 1].weight.rows()) {
      throw Error(ErrorKind::DimensionMismatch, "consecutive layer widths are incompatible");
    }
  }
  revision_ = next_revision();
}

DenseNet DenseNet::make(std::span<const int> widths, Rng& rng, double init_scale,
                        Activation output) {
  if (widths.size() < 2) throw Error(ErrorKind::InvalidArgument, "need input and output width");
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    DenseLayer l;
    l.weight.resize(widths[i + 1], widths[i]);
    l.bias.resize(widths[i + 1]);
    for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
        l.weight(r, c) = rng.uniform(-init_scale, init_scale);
      }
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = rng.uniform(-init_scale, init_scale);
    l.activation = (i + 2 == widths.size()) ? output : Activation::LeakyReLU;
    layers.push_back(std::move(l));
  }
  return DenseNet(std::move(layers));
}

int DenseNet::input_width() const {
  return layers_.empty() ? 0 : int(layers_.front().weight.cols());
}

int DenseNet::output_width() const {
  return layers_.empty() ? 0 : int(layers_.back().weight.rows());
}

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<DenseLayer>& DenseNet::mutable_layers() {
  revision_ = next_revision();
  return layers_;
}

double DenseNet::max_abs_parameter() const {
  double m = 0;
  for (const auto& l : layers_) {
    if (l.weight.size()) m = std::max(m, l.weight.cwiseAbs().maxCoeff());
    if (l.bias.size()) m = std::max(m, l.bias.cwiseAbs().maxCoeff());
  }
  return m;
}

bool DenseNet::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

Eigen::VectorXd DenseNet::flat_parameters() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index at = 0;
  for (const auto& l : layers_) {
    flat.segment(at, l.weight.size()) = l.weight.reshaped();
    at += l.weight.size();
    flat.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
  return flat;
}

void DenseNet::set_flat_parameters(const Eigen::VectorXd& flat) {
  if (std::size_t(flat.size()) != parameter_count()) {
    throw Error(ErrorKind::ShapeMismatch, "flat parameter vector has the wrong length");
  }
  Eigen::Index at = 0;
  for (auto& l : mutable_layers()) {
    l.weight.reshaped() = flat.segment(at, l.weight.size());
    at += l.weight.size();
    l.bias = flat.segment(at, l.bias.size());
    at += l.bias.size();
  }
}

ForwardCache forward(const DenseNet& net, const Eigen::MatrixXd& x) {
  if (x.rows() != net.input_width()) {
    throw Error(ErrorKind::DimensionMismatch, "input has " + std::to_string(x.rows()) +
                                                  " rows, network expects " +
                                                  std::to_string(net.input_width()));
  }
  ForwardCache cache;
  cache.revision = net.revision();
  Eigen::MatrixXd a = x;
  for (const auto& l : net.layers()) {
    cache.inputs.push_back(a);
    Eigen::MatrixXd z = l.weight * a;
    z.colwise() += l.bias;
    a = activate(z, l.activation);
    cache.pre_activations.push_back(std::move(z));
  }
  cache.output = std::move(a);
  return cache;
}

Eigen::VectorXd predict(const DenseNet& net, const Eigen::VectorXd& x) {
  return forward(net, x).output.col(0);
}

Gradients Gradients::zeros_like(const DenseNet& net) {
  Gradients g;
  for (const auto& l : net.layers()) {
    g.weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  if (weight.size() != other.weight.size()) {
    throw Error(ErrorKind::ShapeMismatch, "gradient sets belong to different networks");
  }
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] += other.weight[i];
    bias[i] += other.bias[i];
  }
  if (other.input.size() != 0) {
    if (input.size() == 0) {
      input = other.input;
    } else {
      input += other.input;
    }
  }
  return *this;
}

Eigen::VectorXd Gradients::flat() const {
  Eigen::Index n = 0;
  for (std::size_t i = 0; i < weight.size(); ++i) n += weight[i].size() + bias[i].size();
  Eigen::VectorXd out(n);
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    out.segment(at, weight[i].size()) = weight[i].reshaped();
    at += weight[i].size();
    out.segment(at, bias[i].size()) = bias[i];
    at += bias[i].size();
  }
  return out;
}

Gradients backward(const DenseNet& net, const ForwardCache& cache,
                   const Eigen::MatrixXd& upstream) {
  if (cache.revision != net.revision() || cache.inputs.size() != net.layers().size()) {
    throw Error(ErrorKind::StaleCache, "forward cache does not belong to this network state");
  }
  require_same_shape(upstream, cache.output, "upstream gradient does not match the output");
  Gradients g;
  const std::size_t n = net.layers().size();
  g.weight.resize(n);
  g.bias.resize(n);
  Eigen::MatrixXd delta = upstream;
  for (std::size_t i = n; i-- > 0;) {
    const auto& l = net.layers()[i];
    delta = delta.cwiseProduct(activation_derivative(cache.pre_activations[i], l.activation));
    g.weight[i] = delta * cache.inputs[i].transpose();
    g.bias[i] = delta.rowwise().sum();
    delta = l.weight.transpose() * delta;
  }
  g.input = std::move(delta);
  return g;
}

// ---------------------------------------------------------------------------

double critic_loss(const Eigen::MatrixXd& real_scores, const Eigen::MatrixXd& fake_scores) {
  require_nonempty(real_scores);
  require_nonempty(fake_scores);
  return real_scores.mean() - fake_scores.mean();
}

ScoreGradients critic_loss_gradient(const Eigen::MatrixXd& real_scores,
                                    const Eigen::MatrixXd& fake_scores) {
  require_nonempty(real_scores);
  require_nonempty(fake_scores);
  return {Eigen::MatrixXd::Constant(real_scores.rows(), real_scores.cols(),
                                    1.0 / double(real_scores.size())),
          Eigen::MatrixXd::Constant(fake_scores.rows(), fake_scores.cols(),
                                    -1.0 / double(fake_scores.size()))};
}

double generator_loss(const Eigen::MatrixXd& fake_scores) {
  require_nonempty(fake_scores);
  return -fake_scores.mean();
}

Eigen::MatrixXd generator_loss_gradient(const Eigen::MatrixXd& fake_scores) {
  require_nonempty(fake_scores);
  return Eigen::MatrixXd::Constant(fake_scores.rows(), fake_scores.cols(),
                                   -1.0 / double(fake_scores.size()));
}

double l1_loss(const Eigen::MatrixXd& y, const Eigen::MatrixXd& g) {
  require_same_shape(y, g, "L1 operands differ in shape");
  if (y.size() == 0) throw Error(ErrorKind::EmptyBatch, "L1 operands are empty");
  return (y - g).cwiseAbs().mean();
}

Eigen::MatrixXd l1_loss_gradient(const Eigen::MatrixXd& y, const Eigen::MatrixXd& g) {
  require_same_shape(y, g, "L1 operands differ in shape");
  const double scale = 1.0 / double(g.size());
  return (g - y).unaryExpr([scale](double d) { return d > 0 ? scale : (d < 0 ? -scale : 0.0); });
}

double combined_generator_objective(const Eigen::MatrixXd& fake_scores, const Eigen::MatrixXd& y,
                                    const Eigen::MatrixXd& g, double lambda) {
  return generator_loss(fake_scores) + lambda * l1_loss(y, g);
}

namespace {

Eigen::VectorXd l2_weights(double beta) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(9);
  w(0) = beta;
  return w;
}

void check_l2(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth, double beta) {
  if (predicted.rows() != 9) throw Error(ErrorKind::DimensionMismatch, "expected 9 parameters");
  require_same_shape(predicted, truth, "prediction and ground truth differ in shape");
  if (predicted.cols() == 0) throw Error(ErrorKind::EmptyBatch, "no samples");
  if (!(beta > 0)) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
}

}  // namespace

double weighted_l2(const ParamVector& predicted, const ParamVector& truth, double beta) {
  return weighted_l2(Eigen::MatrixXd(predicted), Eigen::MatrixXd(truth), beta);
}

double weighted_l2(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth, double beta) {
  check_l2(predicted, truth, beta);
  double total = 0;
  for (Eigen::Index c = 0; c < predicted.cols(); ++c) {
    const double d0 = predicted(0, c) - truth(0, c);
    double acc = beta * d0 * d0;
    for (Eigen::Index i = 1; i < 9; ++i) {
      const double d = predicted(i, c) - truth(i, c);
      acc += d * d;
    }
    total += acc / 9.0;
  }
  return predicted.cols() == 1 ? total : total / double(predicted.cols());
}

Eigen::MatrixXd weighted_l2_gradient(const Eigen::MatrixXd& predicted,
                                     const Eigen::MatrixXd& truth, double beta) {
  check_l2(predicted, truth, beta);
  const double scale = 2.0 / (9.0 * double(predicted.cols()));
  return scale * (l2_weights(beta).asDiagonal() * (predicted - truth));
}

// ---------------------------------------------------------------------------

void rmsprop_update(Eigen::Ref<Eigen::MatrixXd> params, const Eigen::Ref<const Eigen::MatrixXd>& grads,
                    Eigen::Ref<Eigen::MatrixXd> mean_square, double alpha, Direction direction,
                    const RmsPropConfig& config) {
  if (params.rows() != grads.rows() || params.cols() != grads.cols() ||
      params.rows() != mean_square.rows() || params.cols() != mean_square.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "RMSProp operands differ in shape");
  }
  mean_square.array() =
      config.decay * mean_square.array() + (1 - config.decay) * grads.array().square();
  const Eigen::ArrayXXd step =
      alpha * grads.array() / (mean_square.array().sqrt() + config.epsilon);
  if (direction == Direction::Ascend) {
    params.array() += step;
  } else {
    params.array() -= step;
  }
}

RmsPropState RmsPropState::for_net(const DenseNet& net) {
  RmsPropState s;
  for (const auto& l : net.layers()) {
    s.weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    s.bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return s;
}

void rmsprop_update(DenseNet& net, const Gradients& grads, RmsPropState& state, double alpha,
                    Direction direction, const RmsPropConfig& config) {
  if (grads.weight.size() != net.layers().size() || state.weight.size() != net.layers().size()) {
    throw Error(ErrorKind::ShapeMismatch, "gradients or state belong to a different network");
  }
  auto& layers = net.mutable_layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    rmsprop_update(layers[i].weight, grads.weight[i], state.weight[i], alpha, direction, config);
    rmsprop_update(layers[i].bias, grads.bias[i], state.bias[i], alpha, direction, config);
  }
}

void clip_weights(DenseNet& net, double c) {
  if (!(c > 0)) throw Error(ErrorKind::InvalidArgument, "clip bound must be positive");
  for (auto& l : net.mutable_layers()) {
    l.weight = l.weight.cwiseMax(-c).cwiseMin(c);
    l.bias = l.bias.cwiseMax(-c).cwiseMin(c);
  }
}

nlohmann::ordered_json to_json(const DenseNet& net) {
  auto layers = nlohmann::ordered_json::array();
  for (const auto& l : net.layers()) {
    nlohmann::ordered_json j;
    j["in"] = l.weight.cols();
    j["out"] = l.weight.rows();
    j["activation"] = l.activation == Activation::LeakyReLU ? "leaky_relu" : "linear";
    auto w = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      auto row = nlohmann::ordered_json::array();
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) row.push_back(l.weight(r, c));
      w.push_back(std::move(row));
    }
    j["weight"] = std::move(w);
    j["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back(std::move(j));
  }
  nlohmann::ordered_json out;
  out["layers"] = std::move(layers);
  return out;
}

DenseNet net_from_json(const nlohmann::json& j) {
  if (!j.contains("layers")) throw Error(ErrorKind::MissingField, "missing field 'layers'");
  std::vector<DenseLayer> layers;
  for (const auto& lj : j["layers"]) {
    DenseLayer l;
    const auto& w = lj.at("weight");
    const auto rows = Eigen::Index(w.size());
    const auto cols = rows ? Eigen::Index(w[0].size()) : 0;
    l.weight.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) l.weight(r, c) = w[r][c].get<double>();
    }
    const auto b = lj.at("bias").get<std::vector<double>>();
    l.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), Eigen::Index(b.size()));
    l.activation = lj.at("activation") == "leaky_relu" ? Activation::LeakyReLU : Activation::Linear;
    layers.push_back(std::move(l));
  }
  return DenseNet(std::move(layers));
}

}  // namespace fishrect::nn
