#include "fishrect/metrics.hpp"

#include <cmath>
#include <numbers>

namespace fishrect {

namespace {

template <typename Sample>
void check_pair(const ImageBuffer<Sample>& a, const ImageBuffer<Sample>& b, const ValidMask* mask) {
  if (!a.same_geometry(b)) throw Error(ErrorKind::DimensionMismatch, "images differ in geometry");
  if (a.empty()) throw Error(ErrorKind::DimensionMismatch, "images are empty");
  if (mask) {
    if (mask->rows() != a.height() || mask->cols() != a.width()) {
      throw Error(ErrorKind::DimensionMismatch, "mask does not match images");
    }
    if (!mask->any()) throw Error(ErrorKind::EmptyMask, "mask has no valid pixel");
  }
}

// 1-D normalized Gaussian taps.
Eigen::ArrayXd gaussian_taps(int window, double sigma) {
  Eigen::ArrayXd g(window);
  const double centre = (window - 1) / 2.0;
  for (int i = 0; i < window; ++i) {
    const double d = i - centre;
    g(i) = std::exp(-d * d / (2 * sigma * sigma));
  }
  return g / g.sum();
}

// Separable "valid" filtering: output is (rows - w + 1) x (cols - w + 1).
Eigen::ArrayXXd filter_valid(const Eigen::ArrayXXd& in, const Eigen::ArrayXd& g) {
  const int w = int(g.size());
  const Eigen::Index rows = in.rows() - w + 1;
  const Eigen::Index cols = in.cols() - w + 1;
  Eigen::ArrayXXd horizontal = Eigen::ArrayXXd::Zero(in.rows(), cols);
  for (int k = 0; k < w; ++k) horizontal += g(k) * in.middleCols(k, cols);
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(rows, cols);
  for (int k = 0; k < w; ++k) out += g(k) * horizontal.middleRows(k, rows);
  return out;
}

}  // namespace

template <typename Sample>
double psnr(const ImageBuffer<Sample>& a, const ImageBuffer<Sample>& b, const ValidMask* mask) {
  check_pair(a, b, mask);
  CompensatedSum sum;
  std::size_t count = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (mask && !(*mask)(y, x)) continue;
      const auto pa = a.pixel(x, y);
      const auto pb = b.pixel(x, y);
      for (int c = 0; c < a.channels(); ++c) {
        const double d = double(pa[c]) - double(pb[c]);
        sum.add(d * d);
      }
      count += a.channels();
    }
  }
  const double mse = sum.value() / double(count);
  if (mse == 0) return std::numeric_limits<double>::infinity();
  const double peak = ImageBuffer<Sample>::max_value();
  return 10.0 * std::log10(peak * peak / mse);
}

template <typename Sample>
Eigen::ArrayXXd luma_plane(const ImageBuffer<Sample>& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw Error(ErrorKind::DimensionMismatch, "SSIM expects 1 or 3 channels");
  }
  Eigen::ArrayXXd plane(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto p = img.pixel(x, y);
      plane(y, x) = img.channels() == 1
                        ? double(p[0])
                        : 0.299 * double(p[0]) + 0.587 * double(p[1]) + 0.114 * double(p[2]);
    }
  }
  return plane;
}

template <typename Sample>
double ssim(const ImageBuffer<Sample>& a, const ImageBuffer<Sample>& b, const ValidMask* mask,
            const SsimOptions& options) {
  check_pair(a, b, mask);
  const int w = options.window;
  if (a.width() < w || a.height() < w) {
    throw Error(ErrorKind::TooSmall, "image is smaller than the SSIM window");
  }
  const Eigen::ArrayXXd la = luma_plane(a);
  const Eigen::ArrayXXd lb = luma_plane(b);
  const Eigen::ArrayXd g = gaussian_taps(w, options.sigma);

  const Eigen::ArrayXXd mu_a = filter_valid(la, g);
  const Eigen::ArrayXXd mu_b = filter_valid(lb, g);
  const Eigen::ArrayXXd var_a = filter_valid(la * la, g) - mu_a * mu_a;
  const Eigen::ArrayXXd var_b = filter_valid(lb * lb, g) - mu_b * mu_b;
  const Eigen::ArrayXXd cov = filter_valid(la * lb, g) - mu_a * mu_b;

  const double peak = ImageBuffer<Sample>::max_value();
  const double c1 = (options.k1 * peak) * (options.k1 * peak);
  const double c2 = (options.k2 * peak) * (options.k2 * peak);
  const Eigen::ArrayXXd map = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
                              ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));

  // Prefix sums of invalid pixels give O(1) full-support tests per window.
  Eigen::ArrayXXi holes;
  if (mask) {
    holes = Eigen::ArrayXXi::Zero(a.height() + 1, a.width() + 1);
    for (int y = 0; y < a.height(); ++y) {
      for (int x = 0; x < a.width(); ++x) {
        holes(y + 1, x + 1) =
            holes(y, x + 1) + holes(y + 1, x) - holes(y, x) + ((*mask)(y, x) ? 0 : 1);
      }
    }
  }
  CompensatedSum sum;
  std::size_t count = 0;
  for (Eigen::Index y = 0; y < map.rows(); ++y) {
    for (Eigen::Index x = 0; x < map.cols(); ++x) {
      if (mask) {
        const int missing = holes(y + w, x + w) - holes(y, x + w) - holes(y + w, x) + holes(y, x);
        if (missing != 0) continue;
      }
      sum.add(map(y, x));
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorKind::EmptyMask, "no SSIM window lies fully inside the mask");
  return sum.value() / double(count);
}

double z_table_quantile(double p) {
  if (!(p > 0 && p < 1)) throw Error(ErrorKind::InvalidArgument, "quantile needs 0 < p < 1");
  // Acklam's rational approximation, then one Halley step on the exact CDF.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double low = 0.02425;
  double x;
  if (p < low) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
  x = x - u / (1 + x * u / 2);
  return std::round(x * 1e6) / 1e6;
}

ConfidenceInterval paired_diff_ci(std::span<const double> diffs, double level) {
  if (diffs.size() < 2) {
    throw Error(ErrorKind::TooFewSamples, "paired interval needs at least two differences");
  }
  if (!(level > 0 && level < 1)) {
    throw Error(ErrorKind::InvalidArgument, "confidence level must lie in (0, 1)");
  }
  const double n = double(diffs.size());
  CompensatedSum total;
  for (double d : diffs) total.add(d);
  const double mean = total.value() / n;
  CompensatedSum squares;
  for (double d : diffs) squares.add((d - mean) * (d - mean));
  const double s = std::sqrt(squares.value() / (n - 1));

  ConfidenceInterval ci;
  ci.level = level;
  ci.mean = mean;
  ci.n = diffs.size();
  ci.half_width = z_table_quantile((1 + level) / 2) * s / std::sqrt(n);
  ci.lower = mean - ci.half_width;
  ci.upper = mean + ci.half_width;
  return ci;
}

nlohmann::ordered_json to_json(const ConfidenceInterval& ci) {
  nlohmann::ordered_json j;
  j["lower"] = ci.lower;
  j["upper"] = ci.upper;
  j["level"] = ci.level;
  j["half_width"] = ci.half_width;
  j["n"] = ci.n;
  j["mean"] = ci.mean;
  j["contains_zero"] = ci.contains_zero();
  return j;
}

#define FISHRECT_INSTANTIATE_METRICS(Sample)                                                   \
  template double psnr(const ImageBuffer<Sample>&, const ImageBuffer<Sample>&,                 \
                       const ValidMask*);                                                      \
  template double ssim(const ImageBuffer<Sample>&, const ImageBuffer<Sample>&,                 \
                       const ValidMask*, const SsimOptions&);                                  \
  template Eigen::ArrayXXd luma_plane(const ImageBuffer<Sample>&);

FISHRECT_INSTANTIATE_METRICS(std::uint8_t)
FISHRECT_INSTANTIATE_METRICS(float)

#undef FISHRECT_INSTANTIATE_METRICS

}  // namespace fishrect
