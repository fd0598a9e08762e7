#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fishrect::nn {

struct ConvLayerSpec {
  int kernel = 4;
  int stride = 2;
  int padding = 1;
  int channels = 64;
};

/// Receptive field after each layer: RF_l = RF_{l-1} + (k_l - 1) J_{l-1},
/// J_l = J_{l-1} s_l, RF_0 = J_0 = 1.
std::vector<long long> receptive_field(std::span<const ConvLayerSpec> stack);

/// "KxKsS" or "KxKsSpP" (padding defaults to 1), e.g. "4x4s2p1".
ConvLayerSpec parse_layer_spec(std::string_view text);

/// Comma-, space- or semicolon-separated list of layer specs.
std::vector<ConvLayerSpec> parse_layer_stack(std::string_view text);

/// Five 4x4 layers with the given strides and 64..512 channels.
std::vector<ConvLayerSpec> patch_critic_stack(std::span<const int> strides);

/// For a five-layer 4x4 stack with stride 2 everywhere (final field 94),
/// explains that the 70-pixel field comes from strides (2,2,2,1,1).
std::optional<std::string> receptive_field_note(std::span<const ConvLayerSpec> stack);

}  // namespace fishrect::nn
