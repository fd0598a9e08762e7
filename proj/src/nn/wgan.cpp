#include "fishrect/nn/wgan.hpp"

#include <cstdio>
#include <fstream>

namespace fishrect::nn {

PairedTask PairedTask::shift(double offset) {
  PairedTask t;
  t.sample = [offset](Rng& rng, int m, Eigen::MatrixXd& source, Eigen::MatrixXd& target) {
    source.resize(1, m);
    for (int i = 0; i < m; ++i) source(0, i) = rng.normal();
    target = source.array() + offset;
  };
  return t;
}

void TrainConfig::validate() const {
  if (!(alpha_critic > 0) || !(alpha_generator > 0)) {
    throw Error(ErrorKind::InvalidArgument, "learning rates must be positive");
  }
  if (!(clip > 0)) throw Error(ErrorKind::InvalidArgument, "clip bound must be positive");
  if (batch < 1) throw Error(ErrorKind::InvalidArgument, "batch size must be at least 1");
  if (critic_iters < 1) throw Error(ErrorKind::InvalidArgument, "critic iterations must be >= 1");
  if (!(lambda >= 0)) throw Error(ErrorKind::InvalidArgument, "lambda must be non-negative");
  if (steps < 0) throw Error(ErrorKind::InvalidArgument, "steps must be non-negative");
}

Eigen::MatrixXd concat_rows(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw Error(ErrorKind::DimensionMismatch, "batch sizes differ");
  Eigen::MatrixXd out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

Gradients critic_objective_gradient(const DenseNet& critic, const Eigen::MatrixXd& real_pairs,
                                    const Eigen::MatrixXd& fake_pairs, double* objective) {
  const auto real = forward(critic, real_pairs);
  const auto fake = forward(critic, fake_pairs);
  if (objective) *objective = critic_loss(real.output, fake.output);
  const auto upstream = critic_loss_gradient(real.output, fake.output);
  Gradients g = backward(critic, real, upstream.real);
  Gradients g_fake = backward(critic, fake, upstream.fake);
  g.input.resize(0, 0);
  g_fake.input.resize(0, 0);
  g += g_fake;
  return g;
}

Gradients generator_objective_gradient(const DenseNet& generator, const DenseNet& critic,
                                       const Eigen::MatrixXd& source,
                                       const Eigen::MatrixXd& target, double lambda,
                                       double* objective) {
  const auto gen = forward(generator, source);
  const auto scores = forward(critic, concat_rows(source, gen.output));
  if (objective) {
    *objective = combined_generator_objective(scores.output, target, gen.output, lambda);
  }
  const Gradients through_critic =
      backward(critic, scores, generator_loss_gradient(scores.output));
  Eigen::MatrixXd upstream = through_critic.input.bottomRows(gen.output.rows());
  if (lambda != 0) upstream += lambda * l1_loss_gradient(target, gen.output);
  return backward(generator, gen, upstream);
}

TrainResult train_wgan(DenseNet generator, DenseNet critic, const PairedTask& task,
                       const TrainConfig& config) {
  config.validate();
  if (generator.input_width() != task.source_dim || generator.output_width() != task.target_dim) {
    throw Error(ErrorKind::DimensionMismatch, "generator does not map source to target space");
  }
  if (critic.input_width() != task.source_dim + task.target_dim || critic.output_width() != 1) {
    throw Error(ErrorKind::DimensionMismatch, "critic must score concatenated pairs");
  }

  Rng rng(config.seed);
  auto critic_state = RmsPropState::for_net(critic);
  auto generator_state = RmsPropState::for_net(generator);
  TrainResult result;
  result.trace.reserve(config.steps);

  Eigen::MatrixXd source, target;
  for (int step = 0; step < config.steps; ++step) {
    TraceRow row;
    row.step = step;
    for (int t = 0; t < config.critic_iters; ++t) {
      task.sample(rng, config.batch, source, target);
      const Eigen::MatrixXd fake = forward(generator, source).output;
      const Gradients g = critic_objective_gradient(critic, concat_rows(source, target),
                                                    concat_rows(source, fake), &row.critic_loss);
      rmsprop_update(critic, g, critic_state, config.alpha_critic, Direction::Ascend);
      clip_weights(critic, config.clip);
      row.max_abs_critic = critic.max_abs_parameter();
      if (row.max_abs_critic > config.clip) {
        throw DivergenceError("clip invariant violated", std::move(result.trace));
      }
    }

    task.sample(rng, config.batch, source, target);
    const Gradients g =
        generator_objective_gradient(generator, critic, source, target, config.lambda);
    {
      const auto gen = forward(generator, source);
      const auto scores = forward(critic, concat_rows(source, gen.output));
      row.generator_loss = generator_loss(scores.output);
      row.l1 = l1_loss(target, gen.output);
    }
    rmsprop_update(generator, g, generator_state, config.alpha_generator, Direction::Descend);

    result.trace.push_back(row);
    if (!generator.all_finite() || !critic.all_finite() || !std::isfinite(row.critic_loss) ||
        !std::isfinite(row.generator_loss)) {
      throw DivergenceError("non-finite parameter at step " + std::to_string(step),
                            std::move(result.trace));
    }
  }
  result.generator = std::move(generator);
  result.critic = std::move(critic);
  return result;
}

ShiftTaskResult run_shift_task(double offset, const TrainConfig& config, int hidden,
                               int eval_samples) {
  if (hidden < 1 || eval_samples < 1) {
    throw Error(ErrorKind::InvalidArgument, "hidden width and sample count must be positive");
  }
  Rng init(mix_seed(config.seed, 1));
  const std::vector<int> gen_widths{1, hidden, hidden, 1};
  const std::vector<int> critic_widths{2, hidden, hidden, 1};
  auto generator = DenseNet::make(gen_widths, init);
  auto critic = DenseNet::make(critic_widths, init);

  ShiftTaskResult out;
  out.training = train_wgan(std::move(generator), std::move(critic), PairedTask::shift(offset), config);
  Rng eval(mix_seed(config.seed, 2));
  Eigen::MatrixXd x(1, eval_samples);
  for (int i = 0; i < eval_samples; ++i) x(0, i) = eval.normal();
  out.mean_shift = (forward(out.training.generator, x).output - x).mean();
  return out;
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::WriteFailure, path.string());
  out << "step,L_D,L_G,L1\n";
  char line[160];
  for (const auto& r : trace) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", r.step, r.critic_loss,
                  r.generator_loss, r.l1);
    out << line;
  }
}

}  // namespace fishrect::nn
