#include "fishrect/nn/receptive_field.hpp"

#include <charconv>

#include "fishrect/error.hpp"

namespace fishrect::nn {

std::vector<long long> receptive_field(std::span<const ConvLayerSpec> stack) {
  if (stack.empty()) throw Error(ErrorKind::InvalidSpec, "layer stack is empty");
  std::vector<long long> out;
  out.reserve(stack.size());
  long long rf = 1, jump = 1;
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const auto& l = stack[i];
    if (l.kernel < 1 || l.stride < 1 || l.padding < 0 || l.channels < 1) {
      throw Error(ErrorKind::InvalidSpec, "layer " + std::to_string(i + 1) +
                                              ": kernel and stride must be >= 1, padding >= 0");
    }
    rf += (l.kernel - 1) * jump;
    jump *= l.stride;
    out.push_back(rf);
  }
  return out;
}

namespace {

int read_int(std::string_view& s, std::string_view whole) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr == s.data()) {
    throw Error(ErrorKind::InvalidSpec, "bad layer spec '" + std::string(whole) + "'");
  }
  s.remove_prefix(std::size_t(ptr - s.data()));
  return value;
}

void expect(std::string_view& s, char c, std::string_view whole) {
  if (s.empty() || s.front() != c) {
    throw Error(ErrorKind::InvalidSpec, "bad layer spec '" + std::string(whole) + "'");
  }
  s.remove_prefix(1);
}

}  // namespace

ConvLayerSpec parse_layer_spec(std::string_view text) {
  std::string_view s = text;
  ConvLayerSpec spec;
  spec.kernel = read_int(s, text);
  expect(s, 'x', text);
  if (read_int(s, text) != spec.kernel) {
    throw Error(ErrorKind::InvalidSpec, "only square kernels are supported: '" +
                                            std::string(text) + "'");
  }
  expect(s, 's', text);
  spec.stride = read_int(s, text);
  if (!s.empty() && s.front() == 'p') {
    s.remove_prefix(1);
    spec.padding = read_int(s, text);
  }
  if (!s.empty()) throw Error(ErrorKind::InvalidSpec, "bad layer spec '" + std::string(text) + "'");
  if (spec.kernel < 1 || spec.stride < 1 || spec.padding < 0) {
    throw Error(ErrorKind::InvalidSpec, "out-of-range layer spec '" + std::string(text) + "'");
  }
  return spec;
}

std::vector<ConvLayerSpec> parse_layer_stack(std::string_view text) {
  std::vector<ConvLayerSpec> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find_first_of(", ;\t\n", pos);
    const auto token = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
    if (!token.empty()) out.push_back(parse_layer_spec(token));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  if (out.empty()) throw Error(ErrorKind::InvalidSpec, "layer stack is empty");
  return out;
}

std::vector<ConvLayerSpec> patch_critic_stack(std::span<const int> strides) {
  static constexpr int kChannels[] = {64, 128, 256, 512, 1};
  if (strides.size() != 5) throw Error(ErrorKind::InvalidSpec, "expected five strides");
  std::vector<ConvLayerSpec> out;
  for (int i = 0; i < 5; ++i) out.push_back({4, strides[i], 1, kChannels[i]});
  return out;
}

std::optional<std::string> receptive_field_note(std::span<const ConvLayerSpec> stack) {
  if (stack.size() != 5) return std::nullopt;
  for (const auto& l : stack) {
    if (l.kernel != 4 || l.stride != 2) return std::nullopt;
  }
  return "note: five 4x4 layers at stride 2 give a receptive field of " +
         std::to_string(receptive_field(stack).back()) +
         "; the commonly quoted 70-pixel field corresponds to strides (2,2,2,1,1)";
}

}  // namespace fishrect::nn
