#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "fishrect/camera_model.hpp"

namespace fishrect {

/// {"fx","fy","cx","cy","k":[k1..k5]}; doubles round-trip exactly.
nlohmann::ordered_json params_to_json(const CameraParamsd& p);

/// Throws MissingField / ParseError naming the offending field.
CameraParamsd params_from_json(const nlohmann::json& j);

CameraParamsd load_params(const std::filesystem::path& path);
void save_params(const std::filesystem::path& path, const CameraParamsd& p);

}  // namespace fishrect
