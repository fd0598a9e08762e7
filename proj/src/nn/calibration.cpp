#include "fishrect/nn/calibration.hpp"

#include "fishrect/random.hpp"

namespace fishrect::nn {

Eigen::VectorXd radial_profile(const DistortionCoeffsd& k, double theta_max) {
  Eigen::VectorXd out(kProfileSamples);
  for (int j = 1; j <= kProfileSamples; ++j) {
    out(j - 1) = distortion_radius(theta_max * j / kProfileSamples, k);
  }
  return out;
}

CalibrationSet make_calibration_set(CalibFamily family, int count, std::uint64_t seed,
                                    double theta_max) {
  if (count < 1) throw Error(ErrorKind::CountOutOfRange, "calibration set needs samples");
  CalibrationSet set{Eigen::MatrixXd(kProfileSamples, count), Eigen::MatrixXd(9, count)};
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    DistortionCoeffsd k;
    do {
      k << rng.uniform(0.3, 1.0), 0.02, 0.005, 0.002, 0.001;
      if (family == CalibFamily::Full) {
        k(1) = rng.uniform(-0.05, 0.05);
        k(2) = rng.uniform(-0.02, 0.02);
        k(3) = rng.uniform(-0.01, 0.01);
        k(4) = rng.uniform(-0.004, 0.004);
      }
    } while (!check_monotonic(k, theta_max));
    const double f = rng.uniform(0.33, 1.0);
    set.features.col(i) = radial_profile(k, theta_max);
    set.targets.col(i) << k, f, f, rng.uniform(0.48, 0.52), rng.uniform(0.48, 0.52);
  }
  return set;
}

double mean_abs_k1_error(const DenseNet& net, const CalibrationSet& data) {
  const Eigen::MatrixXd pred = forward(net, data.features).output;
  return (pred.row(0) - data.targets.row(0)).cwiseAbs().mean();
}

CalibResult calibrate_toy(const CalibrationSet& train, const CalibrationSet& validation,
                          const CalibConfig& config, const CalibLossConfig& loss) {
  if (!(loss.beta > 0)) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
  if (config.batch < 1 || config.steps < 0 || !(config.alpha > 0) || config.hidden < 1) {
    throw Error(ErrorKind::InvalidArgument, "invalid calibration config");
  }
  if (train.features.cols() == 0 || validation.features.cols() == 0) {
    throw Error(ErrorKind::EmptyBatch, "calibration data is empty");
  }

  Rng rng(config.seed);
  const std::vector<int> widths{kProfileSamples, config.hidden, config.hidden, 9};
  CalibResult result;
  result.regressor = DenseNet::make(widths, rng);
  result.baseline_k1_error = mean_abs_k1_error(result.regressor, validation);
  auto state = RmsPropState::for_net(result.regressor);

  const auto n = train.features.cols();
  Eigen::MatrixXd x(kProfileSamples, config.batch), y(9, config.batch);
  result.train_loss.reserve(config.steps);
  for (int step = 0; step < config.steps; ++step) {
    for (int b = 0; b < config.batch; ++b) {
      const auto idx = Eigen::Index(rng.below(std::uint64_t(n)));
      x.col(b) = train.features.col(idx);
      y.col(b) = train.targets.col(idx);
    }
    const auto cache = forward(result.regressor, x);
    result.train_loss.push_back(weighted_l2(cache.output, y, loss.beta));
    const Gradients g =
        backward(result.regressor, cache, weighted_l2_gradient(cache.output, y, loss.beta));
    const double alpha = config.alpha * (1.0 - double(step) / config.steps);
    rmsprop_update(result.regressor, g, state, alpha, Direction::Descend);
    if (!result.regressor.all_finite()) {
      throw Error(ErrorKind::DivergenceDetected, "non-finite regressor parameter");
    }
  }

  result.validation_k1_error = mean_abs_k1_error(result.regressor, validation);
  result.validation_loss =
      weighted_l2(forward(result.regressor, validation.features).output, validation.targets,
                  loss.beta);
  return result;
}

}  // namespace fishrect::nn
