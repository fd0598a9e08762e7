#include "fishrect/warp.hpp"

#include <cmath>
#include <limits>

#include "fishrect/detail/parallel.hpp"

namespace fishrect {

namespace {

struct Neighbours {
  int x0, x1, y0, y1;
  double a, b;  // fractional offsets along u and v
};

std::optional<Neighbours> locate(int width, int height, double u, double v) {
  if (width <= 0 || height <= 0) return std::nullopt;
  if (!(u >= 0 && u <= width - 1 && v >= 0 && v <= height - 1)) return std::nullopt;
  Neighbours n;
  n.x0 = std::min(int(u), std::max(width - 2, 0));
  n.y0 = std::min(int(v), std::max(height - 2, 0));
  n.x1 = std::min(n.x0 + 1, width - 1);
  n.y1 = std::min(n.y0 + 1, height - 1);
  n.a = u - n.x0;
  n.b = v - n.y0;
  return n;
}

// Lerp form keeps constants and integer positions exact.
template <typename Sample>
void blend(const ImageBuffer<Sample>& img, const Neighbours& n, float* out) {
  const auto p00 = img.pixel(n.x0, n.y0);
  const auto p10 = img.pixel(n.x1, n.y0);
  const auto p01 = img.pixel(n.x0, n.y1);
  const auto p11 = img.pixel(n.x1, n.y1);
  for (int c = 0; c < img.channels(); ++c) {
    const double top = double(p00[c]) + n.a * (double(p10[c]) - double(p00[c]));
    const double bottom = double(p01[c]) + n.a * (double(p11[c]) - double(p01[c]));
    out[c] = float(top + n.b * (bottom - top));
  }
}

bool neighbours_in(const ValidMask& mask, const Neighbours& n) {
  return mask(n.y0, n.x0) && mask(n.y0, n.x1) && mask(n.y1, n.x0) && mask(n.y1, n.x1);
}

template <typename Sample>
Sample store(float value) {
  if constexpr (std::is_same_v<Sample, std::uint8_t>) {
    return quantize_u8(value);
  } else {
    return value < 0.0f ? 0.0f : (value > 1.0f ? 1.0f : value);
  }
}

}  // namespace

template <typename Sample>
std::optional<SampleVector> bilinear_sample(const ImageBuffer<Sample>& img, double u, double v) {
  const auto n = locate(img.width(), img.height(), u, v);
  if (!n || img.empty()) return std::nullopt;
  SampleVector out(img.channels());
  blend(img, *n, out.data());
  return out;
}

WarpField WarpField::identity(int width, int height) {
  WarpField f;
  f.u.resize(height, width);
  f.v.resize(height, width);
  f.valid.setConstant(height, width, true);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      f.u(y, x) = x;
      f.v(y, x) = y;
    }
  }
  return f;
}

WarpField build_warp_field(const CameraParamsd& p, int width, int height, WarpDirection direction,
                           const WarpOptions& options) {
  if (width < 0 || height < 0) throw Error(ErrorKind::InvalidArgument, "negative field size");
  if (!p.intrinsics.valid()) throw Error(ErrorKind::InvalidArgument, "invalid intrinsics");
  // Throws Inadmissible before any pixel is touched.
  const DistortionInverse<double> inverse(p.distortion, options.theta_max);

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  WarpField f;
  f.u.setConstant(height, width, nan);
  f.v.setConstant(height, width, nan);
  f.valid.setConstant(height, width, false);

  detail::parallel_rows(height, options.threads, [&](int y) {
    for (int x = 0; x < width; ++x) {
      const PixelCoordd q(x, y);
      std::optional<PixelCoordd> src;
      if (direction == WarpDirection::Synthesize) {
        src = synth_source(q, p, inverse);
      } else if (pixel_to_theta_phi(q, p.intrinsics).theta <= options.theta_max) {
        src = rectify_source(q, p);
      }
      if (src) {
        f.u(y, x) = src->x();
        f.v(y, x) = src->y();
        f.valid(y, x) = true;
      }
    }
  });
  return f;
}

ValidMask field_coverage(const WarpField& field, int src_width, int src_height,
                         const ValidMask* source_mask) {
  if (source_mask && (source_mask->rows() != src_height || source_mask->cols() != src_width)) {
    throw Error(ErrorKind::DimensionMismatch, "source mask does not match source raster");
  }
  ValidMask out(field.height(), field.width());
  for (int y = 0; y < field.height(); ++y) {
    for (int x = 0; x < field.width(); ++x) {
      bool ok = false;
      if (field.valid(y, x)) {
        const auto n = locate(src_width, src_height, field.u(y, x), field.v(y, x));
        ok = n.has_value() && (!source_mask || neighbours_in(*source_mask, *n));
      }
      out(y, x) = ok;
    }
  }
  return out;
}

template <typename Sample>
WarpResult<Sample> apply_warp(const ImageBuffer<Sample>& img, const WarpField& field, Sample fill,
                              const ValidMask* source_mask, int threads) {
  if (field.u.rows() != field.height() || field.u.cols() != field.width() ||
      field.v.rows() != field.height() || field.v.cols() != field.width()) {
    throw Error(ErrorKind::DimensionMismatch, "warp field arrays disagree in shape");
  }
  if (img.empty()) throw Error(ErrorKind::DimensionMismatch, "source image is empty");
  if (source_mask && (source_mask->rows() != img.height() || source_mask->cols() != img.width())) {
    throw Error(ErrorKind::DimensionMismatch, "source mask does not match source image");
  }

  WarpResult<Sample> out{ImageBuffer<Sample>(field.width(), field.height(), img.channels(), fill),
                         ValidMask::Constant(field.height(), field.width(), false)};
  const int channels = img.channels();
  detail::parallel_rows(field.height(), threads, [&](int y) {
    float values[6];
    for (int x = 0; x < field.width(); ++x) {
      if (!field.valid(y, x)) continue;
      const auto n = locate(img.width(), img.height(), field.u(y, x), field.v(y, x));
      if (!n || (source_mask && !neighbours_in(*source_mask, *n))) continue;
      blend(img, *n, values);
      auto px = out.image.pixel(x, y);
      for (int c = 0; c < channels; ++c) px[c] = store<Sample>(values[c]);
      out.mask(y, x) = true;
    }
  });
  return out;
}

template <typename Sample>
WarpResult<Sample> synthesize_fisheye(const ImageBuffer<Sample>& img, const CameraParamsd& p,
                                      const WarpOptions& options) {
  const auto field =
      build_warp_field(p, img.width(), img.height(), WarpDirection::Synthesize, options);
  return apply_warp(img, field, Sample{}, nullptr, options.threads);
}

template <typename Sample>
WarpResult<Sample> rectify_image(const ImageBuffer<Sample>& img, const CameraParamsd& p,
                                 const WarpOptions& options, const ValidMask* source_mask) {
  const auto field =
      build_warp_field(p, img.width(), img.height(), WarpDirection::Rectify, options);
  return apply_warp(img, field, Sample{}, source_mask, options.threads);
}

ValidMask synthesis_mask(const CameraParamsd& p, int fisheye_width, int fisheye_height,
                         int source_width, int source_height, const WarpOptions& options) {
  const auto field =
      build_warp_field(p, fisheye_width, fisheye_height, WarpDirection::Synthesize, options);
  return field_coverage(field, source_width, source_height);
}

template <typename Sample>
ImageBuffer<Sample> concat_channels(const ImageBuffer<Sample>& a, const ImageBuffer<Sample>& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorKind::DimensionMismatch, "concatenated images differ in size");
  }
  if (a.channels() != 3 || b.channels() != 3) {
    throw Error(ErrorKind::DimensionMismatch, "feature concatenation expects 3 + 3 channels");
  }
  ImageBuffer<Sample> out(a.width(), a.height(), 6);
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      auto dst = out.pixel(x, y);
      const auto pa = a.pixel(x, y);
      const auto pb = b.pixel(x, y);
      std::copy(pa.begin(), pa.end(), dst.begin());
      std::copy(pb.begin(), pb.end(), dst.begin() + 3);
    }
  }
  return out;
}

template <typename Sample>
ImageBuffer<Sample> slice_channels(const ImageBuffer<Sample>& img, int first, int count) {
  if (first < 0 || count < 1 || first + count > img.channels()) {
    throw Error(ErrorKind::DimensionMismatch, "channel slice out of range");
  }
  ImageBuffer<Sample> out(img.width(), img.height(), count);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto src = img.pixel(x, y);
      std::copy(src.begin() + first, src.begin() + first + count, out.pixel(x, y).begin());
    }
  }
  return out;
}

#define FISHRECT_INSTANTIATE_WARP(Sample)                                                       \
  template std::optional<SampleVector> bilinear_sample(const ImageBuffer<Sample>&, double,      \
                                                       double);                                 \
  template WarpResult<Sample> apply_warp(const ImageBuffer<Sample>&, const WarpField&, Sample,  \
                                         const ValidMask*, int);                                \
  template WarpResult<Sample> synthesize_fisheye(const ImageBuffer<Sample>&,                    \
                                                 const CameraParamsd&, const WarpOptions&);     \
  template WarpResult<Sample> rectify_image(const ImageBuffer<Sample>&, const CameraParamsd&,   \
                                            const WarpOptions&, const ValidMask*);              \
  template ImageBuffer<Sample> concat_channels(const ImageBuffer<Sample>&,                      \
                                               const ImageBuffer<Sample>&);                     \
  template ImageBuffer<Sample> slice_channels(const ImageBuffer<Sample>&, int, int);

FISHRECT_INSTANTIATE_WARP(std::uint8_t)
FISHRECT_INSTANTIATE_WARP(float)

#undef FISHRECT_INSTANTIATE_WARP

}  // namespace fishrect
