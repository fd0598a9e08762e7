#include "fishrect/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "fishrect/params_io.hpp"

namespace fishrect {

std::string_view to_string(Split s) { return s == Split::Test ? "test" : "train"; }

namespace {

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw Error(ErrorKind::ParseError, "split must be 'train' or 'test', got '" + s + "'");
}

const nlohmann::json& field(const nlohmann::json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) throw Error(ErrorKind::MissingField, std::string("missing '") + name + "'");
  return *it;
}

}  // namespace

nlohmann::ordered_json entry_to_json(const ManifestEntry& e) {
  nlohmann::ordered_json j;
  j["id"] = e.id;
  j["fisheye"] = e.fisheye_path;
  j["perspective"] = e.perspective_path;
  j["params"] = params_to_json(e.params);
  j["preset"] = e.preset_name;
  j["category"] = std::string(to_string(e.category));
  j["split"] = std::string(to_string(e.split));
  j["seed"] = e.seed;
  j["width"] = e.width;
  j["height"] = e.height;
  return j;
}

ManifestEntry entry_from_json(const nlohmann::json& j, double theta_max) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "entry is not an object");
  ManifestEntry e;
  try {
    e.id = field(j, "id").get<std::string>();
    e.fisheye_path = field(j, "fisheye").get<std::string>();
    e.perspective_path = field(j, "perspective").get<std::string>();
    e.params = params_from_json(field(j, "params"));
    e.preset_name = field(j, "preset").get<std::string>();
    e.category = category_from_string(field(j, "category").get<std::string>());
    e.split = split_from_string(field(j, "split").get<std::string>());
    e.seed = field(j, "seed").get<std::uint64_t>();
    e.width = field(j, "width").get<int>();
    e.height = field(j, "height").get<int>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::ParseError, ex.what());
  }
  if (e.id.empty()) throw Error(ErrorKind::ParseError, "empty id");
  if (e.width < 1 || e.height < 1) throw Error(ErrorKind::ParseError, "bad image size");
  if (!check_monotonic(e.params.distortion, theta_max)) {
    throw Error(ErrorKind::Inadmissible, "distortion coefficients are not monotone");
  }
  return e;
}

std::string manifest_to_string(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += entry_to_json(e).dump();
    out += '\n';
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::WriteFailure, path.string());
  out << manifest_to_string(entries);
  if (!out) throw Error(ErrorKind::WriteFailure, path.string());
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path, double theta_max) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  std::vector<ManifestEntry> entries;
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    try {
      const auto j = nlohmann::json::parse(line);
      auto e = entry_from_json(j, theta_max);
      if (!ids.insert(e.id).second) {
        throw Error(ErrorKind::ParseError, "duplicate id '" + e.id + "'");
      }
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::parse_error& ex) {
      throw Error(ErrorKind::ParseError, where + ex.what());
    } catch (const Error& ex) {
      throw Error(ex.kind(), where + ex.message());
    }
  }
  return entries;
}

std::vector<std::string> missing_files(const std::vector<ManifestEntry>& entries,
                                       const std::filesystem::path& root) {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    for (const auto& p : {e.fisheye_path, e.perspective_path}) {
      if (!std::filesystem::exists(root / p)) out.push_back(p);
    }
  }
  return out;
}

}  // namespace fishrect
