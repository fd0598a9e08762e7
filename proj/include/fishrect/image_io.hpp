#pragma once

#include <filesystem>

#include "fishrect/image.hpp"

namespace fishrect {

/// Decodes PNG or JPEG (detected from the file signature) into 1 or 3
/// channels; alpha is dropped and 16-bit PNGs are reduced to 8 bits.
Image8 read_image(const std::filesystem::path& path);

/// 8-bit PNG, 1 or 3 channels.
void write_png(const std::filesystem::path& path, const Image8& img);

/// 0 / 255 grayscale PNG.
void write_mask_png(const std::filesystem::path& path, const ValidMask& mask);
ValidMask read_mask_png(const std::filesystem::path& path);

/// A 6-channel feature is stored as `<stem>_a.png`, `<stem>_b.png` and a
/// `<stem>.json` sidecar naming the two halves. `path` is the sidecar path.
void write_feature(const std::filesystem::path& path, const Image8& feature);
Image8 read_feature(const std::filesystem::path& path);

}  // namespace fishrect
