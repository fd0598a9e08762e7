#pragma once

// A small fully-connected network with hand-written reverse mode, the losses
// of the W-Pix2Pix objective, RMSProp and critic weight clipping.

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "fishrect/error.hpp"
#include "fishrect/random.hpp"

namespace fishrect::nn {

enum class Activation { LeakyReLU, Linear };

inline constexpr double kLeakySlope = 0.2;

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::Linear;
};

class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers);

  /// widths = {in, hidden..., out}. Hidden layers use LeakyReLU(0.2), the
  /// last layer `output`. Parameters are uniform in [-init_scale, init_scale].
  static DenseNet make(std::span<const int> widths, Rng& rng, double init_scale = 0.05,
                       Activation output = Activation::Linear);

  int input_width() const;
  int output_width() const;
  std::size_t parameter_count() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  /// Mutable access invalidates outstanding forward caches.
  std::vector<DenseLayer>& mutable_layers();

  /// Changes whenever parameters may have changed.
  std::uint64_t revision() const { return revision_; }

  double max_abs_parameter() const;
  bool all_finite() const;

  Eigen::VectorXd flat_parameters() const;
  void set_flat_parameters(const Eigen::VectorXd& flat);

 private:
  std::vector<DenseLayer> layers_;
  std::uint64_t revision_ = 0;
};

/// Everything backward() needs; columns of every matrix are batch samples.
struct ForwardCache {
  std::uint64_t revision = 0;
  std::vector<Eigen::MatrixXd> inputs;          // input to each layer
  std::vector<Eigen::MatrixXd> pre_activations; // affine output of each layer
  Eigen::MatrixXd output;
};

ForwardCache forward(const DenseNet& net, const Eigen::MatrixXd& x);
Eigen::VectorXd predict(const DenseNet& net, const Eigen::VectorXd& x);

struct Gradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
  Eigen::MatrixXd input;  // dL/dx, same shape as the forward input

  static Gradients zeros_like(const DenseNet& net);
  Gradients& operator+=(const Gradients& other);
  Eigen::VectorXd flat() const;  // same ordering as DenseNet::flat_parameters
};

/// Reverse pass for a scalar loss whose gradient w.r.t. the network output
/// is `upstream` (same shape as cache.output). Throws StaleCache when the
/// network changed after the forward pass.
Gradients backward(const DenseNet& net, const ForwardCache& cache,
                   const Eigen::MatrixXd& upstream);

// ---------------------------------------------------------------------------
// Losses. Score batches and sample batches are matrices; every entry counts.

/// mean(real) - mean(fake): the quantity the critic ascends.
double critic_loss(const Eigen::MatrixXd& real_scores, const Eigen::MatrixXd& fake_scores);

struct ScoreGradients {
  Eigen::MatrixXd real;
  Eigen::MatrixXd fake;
};
ScoreGradients critic_loss_gradient(const Eigen::MatrixXd& real_scores,
                                    const Eigen::MatrixXd& fake_scores);

/// -mean(fake).
double generator_loss(const Eigen::MatrixXd& fake_scores);
Eigen::MatrixXd generator_loss_gradient(const Eigen::MatrixXd& fake_scores);

/// Mean absolute difference between target y and generated g.
double l1_loss(const Eigen::MatrixXd& y, const Eigen::MatrixXd& g);
/// d l1 / d g (subgradient 0 where y == g).
Eigen::MatrixXd l1_loss_gradient(const Eigen::MatrixXd& y, const Eigen::MatrixXd& g);

/// generator_loss + lambda * l1_loss.
double combined_generator_objective(const Eigen::MatrixXd& fake_scores, const Eigen::MatrixXd& y,
                                    const Eigen::MatrixXd& g, double lambda);

using ParamVector = Eigen::Matrix<double, 9, 1>;

/// (1/9) [beta dK1^2 + sum_{i>=2} dKi^2] for 9-vectors. Matrix overloads
/// treat each column as one sample and average over columns.
double weighted_l2(const ParamVector& predicted, const ParamVector& truth, double beta);
double weighted_l2(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth, double beta);
Eigen::MatrixXd weighted_l2_gradient(const Eigen::MatrixXd& predicted,
                                     const Eigen::MatrixXd& truth, double beta);

// ---------------------------------------------------------------------------
// Optimisation

enum class Direction { Ascend, Descend };

struct RmsPropConfig {
  double decay = 0.99;
  double epsilon = 1e-8;
};

/// ms <- decay ms + (1 - decay) g^2; params +/- alpha g / (sqrt(ms) + eps).
void rmsprop_update(Eigen::Ref<Eigen::MatrixXd> params, const Eigen::Ref<const Eigen::MatrixXd>& grads,
                    Eigen::Ref<Eigen::MatrixXd> mean_square, double alpha, Direction direction,
                    const RmsPropConfig& config = {});

struct RmsPropState {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;

  static RmsPropState for_net(const DenseNet& net);
};

void rmsprop_update(DenseNet& net, const Gradients& grads, RmsPropState& state, double alpha,
                    Direction direction, const RmsPropConfig& config = {});

/// Clamps every weight and bias into [-c, c].
void clip_weights(DenseNet& net, double c);

nlohmann::ordered_json to_json(const DenseNet& net);
DenseNet net_from_json(const nlohmann::json& j);

}  // namespace fishrect::nn
