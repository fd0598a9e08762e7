#pragma once

#include <cstdint>

#include "fishrect/image.hpp"

namespace fishrect {

/// Deterministic procedural RGB "outdoor" scene: graded sky, multi-octave
/// value-noise terrain and soft-edged rectangles and discs with straight
/// structure. Used as a desk-scale stand-in for a perspective image corpus.
Image8 make_scene(int width, int height, std::uint64_t seed);

}  // namespace fishrect
