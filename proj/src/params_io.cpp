#include "fishrect/params_io.hpp"

#include <cmath>
#include <fstream>

namespace fishrect {

nlohmann::ordered_json params_to_json(const CameraParamsd& p) {
  nlohmann::ordered_json j;
  j["fx"] = p.intrinsics.fx;
  j["fy"] = p.intrinsics.fy;
  j["cx"] = p.intrinsics.cx;
  j["cy"] = p.intrinsics.cy;
  auto k = nlohmann::ordered_json::array();
  for (int i = 0; i < 5; ++i) k.push_back(p.distortion(i));
  j["k"] = std::move(k);
  return j;
}

namespace {

double number_field(const nlohmann::json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) {
    throw Error(ErrorKind::MissingField, std::string("missing field '") + name + "'");
  }
  if (!it->is_number()) {
    throw Error(ErrorKind::ParseError, std::string("field '") + name + "' is not a number");
  }
  return it->get<double>();
}

}  // namespace

CameraParamsd params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrorKind::ParseError, "camera parameters must be a JSON object");
  }
  CameraParamsd p;
  p.intrinsics.fx = number_field(j, "fx");
  p.intrinsics.fy = number_field(j, "fy");
  p.intrinsics.cx = number_field(j, "cx");
  p.intrinsics.cy = number_field(j, "cy");
  const auto k = j.find("k");
  if (k == j.end()) throw Error(ErrorKind::MissingField, "missing field 'k'");
  if (!k->is_array()) throw Error(ErrorKind::ParseError, "field 'k' is not an array");
  if (k->size() != 5) {
    throw Error(ErrorKind::MissingField, "field 'k' must hold 5 coefficients, got " +
                                             std::to_string(k->size()));
  }
  for (int i = 0; i < 5; ++i) {
    if (!(*k)[i].is_number()) {
      throw Error(ErrorKind::ParseError, "field 'k[" + std::to_string(i) + "]' is not a number");
    }
    p.distortion(i) = (*k)[i].get<double>();
  }
  if (!(p.intrinsics.fx > 0) || !std::isfinite(p.intrinsics.fx)) {
    throw Error(ErrorKind::InvalidArgument, "field 'fx' must be positive and finite");
  }
  if (!(p.intrinsics.fy > 0) || !std::isfinite(p.intrinsics.fy)) {
    throw Error(ErrorKind::InvalidArgument, "field 'fy' must be positive and finite");
  }
  if (!p.valid()) throw Error(ErrorKind::InvalidArgument, "non-finite field in camera parameters");
  return p;
}

CameraParamsd load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  return params_from_json(j);
}

void save_params(const std::filesystem::path& path, const CameraParamsd& p) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::WriteFailure, path.string());
  out << params_to_json(p).dump(2) << '\n';
}

}  // namespace fishrect
