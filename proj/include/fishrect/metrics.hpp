#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "fishrect/image.hpp"

namespace fishrect {

/// Neumaier-compensated running sum; order effects stay below one ulp of
/// the total for the sizes used here.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0;
  double carry_ = 0;
};

/// 10 log10(MAX^2 / MSE) in dB over masked pixels and all channels.
/// Identical inputs give +infinity.
template <typename Sample>
double psnr(const ImageBuffer<Sample>& a, const ImageBuffer<Sample>& b,
            const ValidMask* mask = nullptr);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean local SSIM over every fully-inside window position (Gaussian window,
/// computed on Rec.601 luma for RGB). With a mask, only windows whose whole
/// support is in the mask count.
template <typename Sample>
double ssim(const ImageBuffer<Sample>& a, const ImageBuffer<Sample>& b,
            const ValidMask* mask = nullptr, const SsimOptions& options = {});

/// Rec.601 luma (or the single channel) as a double plane in the image's
/// own value scale.
template <typename Sample>
Eigen::ArrayXXd luma_plane(const ImageBuffer<Sample>& img);

struct ConfidenceInterval {
  double lower = 0;
  double upper = 0;
  double level = 0;
  double half_width = 0;
  double mean = 0;
  std::size_t n = 0;

  bool contains(double value) const { return lower <= value && value <= upper; }
  /// "No significant difference" verdict of the paired test.
  bool contains_zero() const { return contains(0.0); }
};

/// Standard normal quantile z_p for p in (0, 1), rounded to six decimals the
/// way z tables print it (z_0.975 = 1.959964).
double z_table_quantile(double p);

/// mean +- z_{(1+level)/2} * s / sqrt(n), s the sample standard deviation.
ConfidenceInterval paired_diff_ci(std::span<const double> diffs, double level = 0.95);

nlohmann::ordered_json to_json(const ConfidenceInterval& ci);

}  // namespace fishrect
