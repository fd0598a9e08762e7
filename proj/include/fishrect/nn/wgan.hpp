#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "fishrect/nn/dense_net.hpp"

namespace fishrect::nn {

/// Paired source/target distribution. `sample` fills m columns of the
/// source (fisheye role) and matching target (perspective role) batches.
struct PairedTask {
  int source_dim = 1;
  int target_dim = 1;
  std::function<void(Rng&, int m, Eigen::MatrixXd& source, Eigen::MatrixXd& target)> sample;

  /// x ~ N(0, 1), target x + offset.
  static PairedTask shift(double offset);
};

struct TrainConfig {
  double alpha_critic = 0.0009;
  double alpha_generator = 0.0001;
  double clip = 0.01;
  int batch = 32;
  int critic_iters = 5;
  double lambda = 100;
  int steps = 4000;  // generator updates
  std::uint64_t seed = 0;

  void validate() const;
};

struct TraceRow {
  int step = 0;
  double critic_loss = 0;     // last critic objective of the step
  double generator_loss = 0;  // adversarial part
  double l1 = 0;
  double max_abs_critic = 0;  // after clipping
};

struct TrainResult {
  DenseNet generator;
  DenseNet critic;
  std::vector<TraceRow> trace;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::vector<TraceRow> trace)
      : Error(ErrorKind::DivergenceDetected, what), trace_(std::move(trace)) {}
  const std::vector<TraceRow>& trace() const { return trace_; }

 private:
  std::vector<TraceRow> trace_;
};

/// Alternating WGAN training: `critic_iters` critic ascents on
/// mean f(cat(a, b)) - mean f(cat(a, G(a))) each followed by clipping to
/// [-clip, clip], then one generator descent on -mean f(cat(a, G(a))) +
/// lambda * L1(b, G(a)). Deterministic for a given seed.
TrainResult train_wgan(DenseNet generator, DenseNet critic, const PairedTask& task,
                       const TrainConfig& config);

/// Gradient of -mean f(cat(a, G(a))) + lambda * L1(target, G(a)) w.r.t. the
/// generator, back-propagated through a frozen critic.
Gradients generator_objective_gradient(const DenseNet& generator, const DenseNet& critic,
                                       const Eigen::MatrixXd& source,
                                       const Eigen::MatrixXd& target, double lambda,
                                       double* objective = nullptr);

/// Gradient of mean f(real pairs) - mean f(fake pairs) w.r.t. the critic.
Gradients critic_objective_gradient(const DenseNet& critic, const Eigen::MatrixXd& real_pairs,
                                    const Eigen::MatrixXd& fake_pairs,
                                    double* objective = nullptr);

/// Stacks a over b (column-wise pairing).
Eigen::MatrixXd concat_rows(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct ShiftTaskResult {
  TrainResult training;
  double mean_shift = 0;  // mean of G(x) - x on fresh samples
};

/// The 1-D shift task end to end: generator {1,h,h,1}, critic {2,h,h,1},
/// both seeded from config.seed, evaluated on `eval_samples` fresh draws.
ShiftTaskResult run_shift_task(double offset, const TrainConfig& config, int hidden = 16,
                               int eval_samples = 4096);

/// step,L_D,L_G,L1 CSV.
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace);

}  // namespace fishrect::nn
