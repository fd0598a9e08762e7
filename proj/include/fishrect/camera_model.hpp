#pragma once

// Pinhole projection, odd-polynomial fisheye distortion and the two backward
// maps used for image synthesis and rectification. Everything here is a pure
// function of small value types, templated on the scalar.

#include <Eigen/Core>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "fishrect/error.hpp"

namespace fishrect {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

/// (u, v): column, row. Continuous; pixel centers sit on integers.
template <typename Scalar>
using PixelCoord = Vector2<Scalar>;
template <typename Scalar>
using WorldPoint = Vector3<Scalar>;
template <typename Scalar>
using CameraPoint = Vector3<Scalar>;

/// k1..k5 of r(theta) = sum_i k_i theta^(2i-1).
template <typename Scalar>
using DistortionCoeffs = Eigen::Matrix<Scalar, 5, 1>;

inline constexpr double kDefaultThetaMax = 1.35;
inline constexpr int kAdmissibilitySamples = 1024;
inline constexpr double kInversionTolerance = 1e-10;
inline constexpr int kNewtonMaxIterations = 50;

template <typename Scalar = double>
struct IntrinsicParams {
  Scalar fx{1};
  Scalar fy{1};
  Scalar cx{0};
  Scalar cy{0};

  bool valid() const {
    return std::isfinite(fx) && std::isfinite(fy) && fx > 0 && fy > 0 &&
           std::isfinite(cx) && std::isfinite(cy);
  }

  Vector2<Scalar> principal_point() const { return {cx, cy}; }

  bool operator==(const IntrinsicParams&) const = default;
};

template <typename Scalar = double>
struct CameraParams {
  IntrinsicParams<Scalar> intrinsics;
  DistortionCoeffs<Scalar> distortion = DistortionCoeffs<Scalar>::Zero();

  /// K_d layout: (k1..k5, fx, fy, cx, cy).
  Eigen::Matrix<Scalar, 9, 1> to_vector() const {
    Eigen::Matrix<Scalar, 9, 1> out;
    out.template head<5>() = distortion;
    out.template tail<4>() << intrinsics.fx, intrinsics.fy, intrinsics.cx,
        intrinsics.cy;
    return out;
  }

  static CameraParams from_vector(const Eigen::Matrix<Scalar, 9, 1>& v) {
    CameraParams p;
    p.distortion = v.template head<5>();
    p.intrinsics = {v(5), v(6), v(7), v(8)};
    return p;
  }

  bool valid() const { return intrinsics.valid() && distortion.allFinite(); }

  bool operator==(const CameraParams& o) const {
    return intrinsics == o.intrinsics && distortion == o.distortion;
  }
};

template <typename Scalar = double>
struct ExtrinsicParams {
  Matrix3<Scalar> rotation = Matrix3<Scalar>::Identity();
  Vector3<Scalar> translation = Vector3<Scalar>::Zero();

  bool valid(Scalar tolerance = Scalar(1e-9)) const {
    const Matrix3<Scalar> gram = rotation.transpose() * rotation;
    return (gram - Matrix3<Scalar>::Identity()).cwiseAbs().maxCoeff() <=
               tolerance &&
           std::abs(rotation.determinant() - Scalar(1)) <= tolerance;
  }
};

/// theta: angle to the optical axis; phi: azimuth of (x, y) from +x in
/// (-pi, pi]. r_distorted is only populated by the distorting maps.
template <typename Scalar = double>
struct RadialSample {
  Scalar theta{0};
  Scalar phi{0};
  Scalar r_perspective{0};
  Scalar r_distorted{0};
};

using IntrinsicParamsd = IntrinsicParams<double>;
using CameraParamsd = CameraParams<double>;
using ExtrinsicParamsd = ExtrinsicParams<double>;
using DistortionCoeffsd = DistortionCoeffs<double>;
using PixelCoordd = PixelCoord<double>;

// ---------------------------------------------------------------------------
// Projection

template <typename Scalar>
PixelCoord<Scalar> project_world_point(const WorldPoint<Scalar>& p,
                                       const ExtrinsicParams<Scalar>& e,
                                       const IntrinsicParams<Scalar>& i) {
  if (!e.valid()) {
    throw Error(ErrorKind::InvalidRotation,
                "rotation is not orthonormal with determinant +1");
  }
  const CameraPoint<Scalar> pc = e.rotation * p + e.translation;
  if (!(pc.z() > 0)) {
    throw Error(ErrorKind::NonPositiveDepth,
                "point has Zc = " + std::to_string(double(pc.z())));
  }
  return {i.fx * pc.x() / pc.z() + i.cx, i.fy * pc.y() / pc.z() + i.cy};
}

template <typename Scalar>
Scalar perspective_radius(Scalar theta, Scalar f) {
  if (!(theta >= 0) || theta >= std::numbers::pi_v<Scalar> / 2) {
    throw Error(ErrorKind::OutOfDomain,
                "perspective radius needs 0 <= theta < pi/2");
  }
  return f * std::tan(theta);
}

// ---------------------------------------------------------------------------
// Radial polynomial

template <typename Scalar>
Scalar distortion_radius(Scalar theta, const DistortionCoeffs<Scalar>& k) {
  const Scalar t2 = theta * theta;
  return theta * (k(0) + t2 * (k(1) + t2 * (k(2) + t2 * (k(3) + t2 * k(4)))));
}

template <typename Scalar>
Scalar distortion_radius_derivative(Scalar theta,
                                    const DistortionCoeffs<Scalar>& k) {
  const Scalar t2 = theta * theta;
  return k(0) +
         t2 * (3 * k(1) + t2 * (5 * k(2) + t2 * (7 * k(3) + t2 * 9 * k(4))));
}

/// Admissible iff r'(theta) > 0 at theta_max * j / N for j = 1..N.
template <typename Scalar>
bool check_monotonic(const DistortionCoeffs<Scalar>& k, Scalar theta_max,
                     int samples = kAdmissibilitySamples) {
  if (!(theta_max > 0) || !k.allFinite()) return false;
  for (int j = 1; j <= samples; ++j) {
    const Scalar theta =
        (j == samples) ? theta_max : theta_max * Scalar(j) / Scalar(samples);
    if (!(distortion_radius_derivative(theta, k) > 0)) return false;
  }
  return true;
}

/// Inverse of the radial polynomial on [0, theta_max]. Construction checks
/// admissibility once so per-pixel inversions stay cheap.
template <typename Scalar = double>
class DistortionInverse {
 public:
  DistortionInverse(const DistortionCoeffs<Scalar>& k,
                    Scalar theta_max = Scalar(kDefaultThetaMax))
      : k_(k), theta_max_(theta_max) {
    if (!check_monotonic(k, theta_max)) {
      throw Error(ErrorKind::Inadmissible,
                  "r'(theta) is not positive on (0, theta_max]");
    }
    r_max_ = distortion_radius(theta_max_, k_);
  }

  Scalar theta_max() const { return theta_max_; }
  Scalar max_radius() const { return r_max_; }
  const DistortionCoeffs<Scalar>& coeffs() const { return k_; }

  bool in_range(Scalar r_d) const { return r_d >= 0 && r_d <= r_max_; }

  Scalar operator()(Scalar r_d) const {
    if (!in_range(r_d)) {
      throw Error(ErrorKind::OutOfRange,
                  "radius " + std::to_string(double(r_d)) +
                      " exceeds r(theta_max) = " + std::to_string(double(r_max_)));
    }
    return solve(r_d);
  }

 private:
  // Safeguarded Newton: the bracket [lo, hi] always holds the root; any step
  // that leaves it (or fails to shrink the residual) becomes a bisection.
  Scalar solve(Scalar r_d) const {
    if (r_d == 0) return 0;
    if (r_d == r_max_) return theta_max_;
    Scalar lo = 0;
    Scalar hi = theta_max_;
    Scalar theta = k_(0) > 0 ? r_d / k_(0) : r_d;
    if (!(theta > lo && theta < hi)) theta = (lo + hi) / 2;

    Scalar best = theta;
    Scalar best_residual = std::numeric_limits<Scalar>::infinity();
    const int max_total = kNewtonMaxIterations + 4 * std::numeric_limits<Scalar>::digits;
    int newton_steps = 0;
    for (int iter = 0; iter < max_total; ++iter) {
      const Scalar f = distortion_radius(theta, k_) - r_d;
      if (std::abs(f) < best_residual) {
        best_residual = std::abs(f);
        best = theta;
      }
      if (f == 0) return theta;
      if (f < 0) lo = theta; else hi = theta;

      Scalar next = (lo + hi) / 2;
      if (newton_steps < kNewtonMaxIterations) {
        const Scalar df = distortion_radius_derivative(theta, k_);
        const Scalar candidate = theta - f / df;
        if (df > 0 && candidate > lo && candidate < hi) {
          next = candidate;
          ++newton_steps;
        }
      }
      const Scalar step = std::abs(next - theta);
      theta = next;
      if (step <= std::numeric_limits<Scalar>::epsilon() * std::max(Scalar(1), theta) ||
          hi - lo <= std::numeric_limits<Scalar>::epsilon() * hi) {
        break;
      }
    }
    const Scalar f = std::abs(distortion_radius(theta, k_) - r_d);
    return f <= best_residual ? theta : best;
  }

  DistortionCoeffs<Scalar> k_;
  Scalar theta_max_;
  Scalar r_max_{0};
};

template <typename Scalar>
Scalar invert_distortion_radius(Scalar r_d, const DistortionCoeffs<Scalar>& k,
                                Scalar theta_max = Scalar(kDefaultThetaMax)) {
  return DistortionInverse<Scalar>(k, theta_max)(r_d);
}

// ---------------------------------------------------------------------------
// Pixel-level maps

template <typename Scalar>
RadialSample<Scalar> pixel_to_theta_phi(const PixelCoord<Scalar>& q,
                                        const IntrinsicParams<Scalar>& i) {
  const Scalar x = (q.x() - i.cx) / i.fx;
  const Scalar y = (q.y() - i.cy) / i.fy;
  RadialSample<Scalar> s;
  s.r_perspective = std::hypot(x, y);
  s.theta = std::atan(s.r_perspective);
  if (s.r_perspective > 0) {
    s.phi = std::atan2(y, x);
    if (s.phi == -std::numbers::pi_v<Scalar>) s.phi = std::numbers::pi_v<Scalar>;
  }
  return s;
}

/// Perspective pixel -> fisheye pixel. Writes c + f * r(theta) * p / |p| in
/// normalized coordinates, so the principal point maps to itself exactly.
template <typename Scalar>
PixelCoord<Scalar> distort_pixel(const PixelCoord<Scalar>& q,
                                 const CameraParams<Scalar>& p) {
  const auto& in = p.intrinsics;
  if (!q.allFinite()) {
    throw Error(ErrorKind::OutOfDomain, "pixel maps to theta >= pi/2");
  }
  const Scalar x = (q.x() - in.cx) / in.fx;
  const Scalar y = (q.y() - in.cy) / in.fy;
  const Scalar r = std::hypot(x, y);
  if (r == 0) return in.principal_point();
  if (!std::isfinite(r)) {
    throw Error(ErrorKind::OutOfDomain, "pixel maps to theta >= pi/2");
  }
  const Scalar scale = distortion_radius(std::atan(r), p.distortion) / r;
  return {in.cx + in.fx * scale * x, in.cy + in.fy * scale * y};
}

/// Backward map of the rectification layer: for a rectified output pixel,
/// where to read in the fisheye image. Geometrically the same map as
/// distort_pixel.
template <typename Scalar>
PixelCoord<Scalar> rectify_source(const PixelCoord<Scalar>& q_rect,
                                  const CameraParams<Scalar>& p) {
  return distort_pixel(q_rect, p);
}

/// Backward map for synthesis: fisheye pixel -> perspective pixel, or
/// nullopt when the pixel lies outside the modeled field of view.
template <typename Scalar>
std::optional<PixelCoord<Scalar>> synth_source(
    const PixelCoord<Scalar>& q_fish, const CameraParams<Scalar>& p,
    const DistortionInverse<Scalar>& inverse) {
  const auto& in = p.intrinsics;
  const Scalar x = (q_fish.x() - in.cx) / in.fx;
  const Scalar y = (q_fish.y() - in.cy) / in.fy;
  const Scalar r_d = std::hypot(x, y);
  if (r_d == 0) return in.principal_point();
  if (!inverse.in_range(r_d)) return std::nullopt;
  const Scalar theta = inverse(r_d);
  constexpr Scalar kPoleMargin = Scalar(1e-6);
  if (theta >= std::numbers::pi_v<Scalar> / 2 - kPoleMargin) return std::nullopt;
  const Scalar scale = std::tan(theta) / r_d;
  return PixelCoord<Scalar>{in.cx + in.fx * scale * x, in.cy + in.fy * scale * y};
}

template <typename Scalar>
std::optional<PixelCoord<Scalar>> synth_source(
    const PixelCoord<Scalar>& q_fish, const CameraParams<Scalar>& p,
    Scalar theta_max = Scalar(kDefaultThetaMax)) {
  return synth_source(q_fish, p, DistortionInverse<Scalar>(p.distortion, theta_max));
}

}  // namespace fishrect
