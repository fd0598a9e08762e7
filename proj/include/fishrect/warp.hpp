#pragma once

// Whole-image backward warping built on the point maps of camera_model.hpp.

#include <Eigen/Core>

#include <optional>

#include "fishrect/camera_model.hpp"
#include "fishrect/image.hpp"

namespace fishrect {

/// Up to six channels without heap allocation.
using SampleVector = Eigen::Matrix<float, Eigen::Dynamic, 1, Eigen::ColMajor, 6, 1>;

/// Bilinear blend of the four neighbours of (u, v); pixel centers sit on
/// integer coordinates. nullopt outside [0, W-1] x [0, H-1] or for non-finite
/// input. Values are in the image's own scale (0..255 for 8-bit).
template <typename Sample>
std::optional<SampleVector> bilinear_sample(const ImageBuffer<Sample>& img, double u, double v);

enum class WarpDirection { Synthesize, Rectify };

struct WarpField {
  using Coords = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Coords u;  // source column per output pixel
  Coords v;  // source row per output pixel
  ValidMask valid;

  int width() const { return int(valid.cols()); }
  int height() const { return int(valid.rows()); }

  static WarpField identity(int width, int height);
};

struct WarpOptions {
  double theta_max = kDefaultThetaMax;
  int threads = 1;
};

/// Synthesize: output fisheye pixel -> perspective source (synth_source).
/// Rectify: output rectified pixel -> fisheye source (rectify_source), limited
/// to theta <= theta_max. Pixels without a source are flagged invalid and
/// keep NaN coordinates. Throws Inadmissible for non-monotone coefficients.
WarpField build_warp_field(const CameraParamsd& p, int width, int height, WarpDirection direction,
                           const WarpOptions& options = {});

template <typename Sample>
struct WarpResult {
  ImageBuffer<Sample> image;
  ValidMask mask;
};

/// Valid where the field is in-domain and the source lies inside a
/// src_width x src_height raster. With `source_mask`, all four bilinear
/// neighbours must also be valid in it.
ValidMask field_coverage(const WarpField& field, int src_width, int src_height,
                         const ValidMask* source_mask = nullptr);

template <typename Sample>
WarpResult<Sample> apply_warp(const ImageBuffer<Sample>& img, const WarpField& field,
                              Sample fill = Sample{}, const ValidMask* source_mask = nullptr,
                              int threads = 1);

/// Perspective image -> fisheye image of the same size.
template <typename Sample>
WarpResult<Sample> synthesize_fisheye(const ImageBuffer<Sample>& img, const CameraParamsd& p,
                                      const WarpOptions& options = {});

/// Fisheye image -> rectified perspective image of the same size.
/// `source_mask` marks the fisheye pixels that hold real content.
template <typename Sample>
WarpResult<Sample> rectify_image(const ImageBuffer<Sample>& img, const CameraParamsd& p,
                                 const WarpOptions& options = {},
                                 const ValidMask* source_mask = nullptr);

/// Mask of the fisheye pixels that a synthesis from a source_width x
/// source_height perspective image fills with content.
ValidMask synthesis_mask(const CameraParamsd& p, int fisheye_width, int fisheye_height,
                         int source_width, int source_height, const WarpOptions& options = {});

/// H x W x 6 feature: a's channels then b's.
template <typename Sample>
ImageBuffer<Sample> concat_channels(const ImageBuffer<Sample>& a, const ImageBuffer<Sample>& b);

template <typename Sample>
ImageBuffer<Sample> slice_channels(const ImageBuffer<Sample>& img, int first, int count);

}  // namespace fishrect
