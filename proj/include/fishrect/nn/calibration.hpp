#pragma once

// Small regression from radial distortion profiles to the 9 camera
// parameters, trained under the K1-weighted L2 loss.

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "fishrect/camera_model.hpp"
#include "fishrect/nn/dense_net.hpp"

namespace fishrect::nn {

inline constexpr int kProfileSamples = 16;

/// r(theta_j) for theta_j = theta_max * j / 16, j = 1..16.
Eigen::VectorXd radial_profile(const DistortionCoeffsd& k, double theta_max = kDefaultThetaMax);

enum class CalibFamily {
  K1Only,  // k1 varies, k2..k5 fixed
  Full,    // all five coefficients vary
};

struct CalibrationSet {
  Eigen::MatrixXd features;  // 16 x count
  Eigen::MatrixXd targets;   // 9 x count: k1..k5, fx/W, fy/H, cx/W, cy/H
};

/// Random admissible cameras of the family. Intrinsics are normalized by
/// the raster size so every target is O(1).
CalibrationSet make_calibration_set(CalibFamily family, int count, std::uint64_t seed,
                                    double theta_max = kDefaultThetaMax);

struct CalibConfig {
  int steps = 3000;
  int batch = 16;
  double alpha = 0.001;  // decays linearly to 0 over `steps`
  int hidden = 32;
  std::uint64_t seed = 0;
};

struct CalibLossConfig {
  double beta = 32;
};

struct CalibResult {
  DenseNet regressor;
  double validation_k1_error = 0;  // mean |dk1| on held-out data
  double baseline_k1_error = 0;    // same metric for the untrained net
  double validation_loss = 0;      // weighted L2 on held-out data
  std::vector<double> train_loss;  // per step
};

double mean_abs_k1_error(const DenseNet& net, const CalibrationSet& data);

CalibResult calibrate_toy(const CalibrationSet& train, const CalibrationSet& validation,
                          const CalibConfig& config, const CalibLossConfig& loss);

}  // namespace fishrect::nn
