#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fishrect/camera_model.hpp"
#include "fishrect/paramlab.hpp"

namespace fishrect {

enum class Split { Train, Test };

std::string_view to_string(Split s);

/// One (fisheye, perspective, parameters) sample. Paths are relative to the
/// manifest's directory.
struct ManifestEntry {
  std::string id;
  std::string fisheye_path;
  std::string perspective_path;
  CameraParamsd params;
  std::string preset_name;
  Category category = Category::Minor;
  Split split = Split::Train;
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;

  bool operator==(const ManifestEntry&) const = default;
};

nlohmann::ordered_json entry_to_json(const ManifestEntry& e);
ManifestEntry entry_from_json(const nlohmann::json& j, double theta_max = kDefaultThetaMax);

/// One compact JSON object per line, fixed key order.
std::string manifest_to_string(const std::vector<ManifestEntry>& entries);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

/// Parses and validates every line (all 9 parameters present, coefficients
/// admissible, ids unique). Errors carry the 1-based line number.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path,
                                         double theta_max = kDefaultThetaMax);

/// Files referenced by entries that do not exist under `root`.
std::vector<std::string> missing_files(const std::vector<ManifestEntry>& entries,
                                       const std::filesystem::path& root);

}  // namespace fishrect
