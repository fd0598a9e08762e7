#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fishrect/camera_model.hpp"
#include "fishrect/image.hpp"

namespace fishrect {

enum class Category { Minor, FullFrame, Drum, SevereDrum, FullCircle };

std::string_view to_string(Category c);
Category category_from_string(std::string_view name);

struct Preset {
  std::string name;
  Category category = Category::Minor;
  CameraParamsd params;  // intrinsics at the reference resolution

  bool operator==(const Preset&) const = default;
};

/// Catalog intrinsics are stated for a 256 x 256 raster.
inline constexpr int kReferenceWidth = 256;
inline constexpr int kReferenceHeight = 256;

/// The 12-entry distortion catalog. Values are engineering choices tuned to
/// the qualitative categories; k1 carries the variation, k2..k5 stay small
/// and nonzero.
std::vector<Preset> preset_catalog();

/// Rescales intrinsics from the reference raster to width x height
/// (principal point stays at the same relative position).
CameraParamsd scale_to(const CameraParamsd& reference, int width, int height);

/// `count` distinct presets, uniformly without replacement (partial
/// Fisher-Yates driven by std::mt19937_64 with rejection-sampled indices).
std::vector<Preset> sample_presets(const std::vector<Preset>& catalog, int count,
                                   std::uint64_t seed);

nlohmann::ordered_json catalog_to_json(const std::vector<Preset>& catalog);
std::vector<Preset> catalog_from_json(const nlohmann::json& j);
std::vector<Preset> load_catalog(const std::filesystem::path& path);
void save_catalog(const std::filesystem::path& path, const std::vector<Preset>& catalog);

struct SweepSpec {
  std::vector<int> coefficients{1};  // 1-based k indices, one montage row each
  double lo = -0.9;
  double hi = 1.0;
  int steps = 8;
  CameraParamsd baseline;
  double theta_max = kDefaultThetaMax;
  int threads = 1;
};

/// Default baseline for a raster: equidistant k = (1, 0, 0, 0, 0),
/// f = width / 2, principal point at the raster centre.
CameraParamsd default_baseline(int width, int height);

struct SweepCell {
  int coefficient = 1;
  double value = 0;
  CameraParamsd params;
  bool admissible = true;
};

template <typename Sample>
struct SweepResult {
  ImageBuffer<Sample> montage;
  std::vector<SweepCell> cells;  // row-major, matching the montage grid
};

/// One synthesized fisheye per sweep value, `steps` cells per row and one row
/// per requested coefficient. Inadmissible cells are left at the fill colour
/// and flagged.
template <typename Sample>
SweepResult<Sample> sweep_parameter(const SweepSpec& spec, const ImageBuffer<Sample>& img);

nlohmann::ordered_json sweep_cells_to_json(const std::vector<SweepCell>& cells);

}  // namespace fishrect
