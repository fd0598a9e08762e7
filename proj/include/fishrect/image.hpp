#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

#include "fishrect/error.hpp"

namespace fishrect {

/// Row-major, channel-interleaved raster. `Sample` is either std::uint8_t
/// (0..255) or float (unit interval).
template <typename Sample>
class ImageBuffer {
  static_assert(std::is_same_v<Sample, std::uint8_t> || std::is_same_v<Sample, float>,
                "ImageBuffer holds 8-bit or float samples");

 public:
  using sample_type = Sample;

  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels, Sample fill = Sample{})
      : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0 || channels < 1 || channels > 6) {
      throw Error(ErrorKind::InvalidArgument, "bad image geometry");
    }
    data_.assign(std::size_t(width) * height * channels, fill);
  }

  /// Full-scale sample value: 255 for 8-bit, 1 for float.
  static constexpr double max_value() {
    return std::is_same_v<Sample, std::uint8_t> ? 255.0 : 1.0;
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  bool same_geometry(const ImageBuffer& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  std::size_t index(int x, int y, int c = 0) const {
    return (std::size_t(y) * width_ + x) * channels_ + c;
  }

  Sample& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  Sample at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<Sample> pixel(int x, int y) {
    return {data_.data() + index(x, y), std::size_t(channels_)};
  }
  std::span<const Sample> pixel(int x, int y) const {
    return {data_.data() + index(x, y), std::size_t(channels_)};
  }

  std::vector<Sample>& data() { return data_; }
  const std::vector<Sample>& data() const { return data_; }

  bool operator==(const ImageBuffer&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<Sample> data_;
};

using Image8 = ImageBuffer<std::uint8_t>;
using ImageF = ImageBuffer<float>;

/// rows = height, cols = width; true where an output pixel carries data.
using ValidMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Round-half-up with clamping to [0, 255].
inline std::uint8_t quantize_u8(double value) {
  const double r = std::floor(value + 0.5);
  return static_cast<std::uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
}

inline ImageF to_float(const Image8& img) {
  ImageF out(img.width(), img.height(), img.channels());
  for (std::size_t i = 0; i < img.size(); ++i) out.data()[i] = img.data()[i] / 255.0f;
  return out;
}

inline Image8 to_u8(const ImageF& img) {
  Image8 out(img.width(), img.height(), img.channels());
  for (std::size_t i = 0; i < img.size(); ++i) {
    out.data()[i] = quantize_u8(double(img.data()[i]) * 255.0);
  }
  return out;
}

}  // namespace fishrect
