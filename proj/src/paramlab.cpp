#include "fishrect/paramlab.hpp"

#include <fstream>
#include <numeric>

#include "fishrect/params_io.hpp"
#include "fishrect/random.hpp"
#include "fishrect/warp.hpp"

namespace fishrect {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Minor: return "Minor";
    case Category::FullFrame: return "FullFrame";
    case Category::Drum: return "Drum";
    case Category::SevereDrum: return "SevereDrum";
    case Category::FullCircle: return "FullCircle";
  }
  return "Minor";
}

Category category_from_string(std::string_view name) {
  for (Category c : {Category::Minor, Category::FullFrame, Category::Drum, Category::SevereDrum,
                     Category::FullCircle}) {
    if (to_string(c) == name) return c;
  }
  throw Error(ErrorKind::ParseError, "unknown preset category '" + std::string(name) + "'");
}

namespace {

Preset make_preset(const char* name, Category category, double f,
                   std::initializer_list<double> k) {
  Preset p;
  p.name = name;
  p.category = category;
  p.params.intrinsics = {f, f, (kReferenceWidth - 1) / 2.0, (kReferenceHeight - 1) / 2.0};
  int i = 0;
  for (double v : k) p.params.distortion(i++) = v;
  return p;
}

}  // namespace

std::vector<Preset> preset_catalog() {
  using C = Category;
  return {
      make_preset("minor_a", C::Minor, 256, {1.00, 0.010, 0.004, 0.002, 0.001}),
      make_preset("minor_b", C::Minor, 224, {0.95, 0.015, 0.006, 0.003, 0.001}),
      make_preset("fullframe_a", C::FullFrame, 160, {0.90, 0.020, 0.008, 0.004, 0.002}),
      make_preset("fullframe_b", C::FullFrame, 150, {0.85, -0.015, 0.010, 0.004, 0.002}),
      make_preset("fullframe_c", C::FullFrame, 140, {0.80, 0.025, -0.010, 0.005, 0.002}),
      make_preset("drum_a", C::Drum, 128, {0.70, 0.020, 0.010, -0.005, 0.002}),
      make_preset("drum_b", C::Drum, 120, {0.65, -0.020, 0.015, 0.005, -0.002}),
      make_preset("severe_drum_a", C::SevereDrum, 112, {0.55, 0.030, -0.010, 0.005, 0.002}),
      make_preset("severe_drum_b", C::SevereDrum, 104, {0.50, -0.025, 0.020, -0.005, 0.003}),
      make_preset("full_circle_a", C::FullCircle, 96, {0.42, 0.030, 0.010, 0.005, 0.002}),
      make_preset("full_circle_b", C::FullCircle, 90, {0.36, 0.040, -0.015, 0.008, 0.003}),
      make_preset("full_circle_c", C::FullCircle, 84, {0.30, 0.050, 0.020, 0.010, 0.004}),
  };
}

CameraParamsd scale_to(const CameraParamsd& reference, int width, int height) {
  CameraParamsd p = reference;
  const double sx = double(width) / kReferenceWidth;
  const double sy = double(height) / kReferenceHeight;
  p.intrinsics.fx *= sx;
  p.intrinsics.fy *= sy;
  // Keep the principal point's relative position in pixel-center coordinates.
  p.intrinsics.cx = (reference.intrinsics.cx + 0.5) * sx - 0.5;
  p.intrinsics.cy = (reference.intrinsics.cy + 0.5) * sy - 0.5;
  return p;
}

std::vector<Preset> sample_presets(const std::vector<Preset>& catalog, int count,
                                   std::uint64_t seed) {
  if (count < 1 || std::size_t(count) > catalog.size()) {
    throw Error(ErrorKind::CountOutOfRange, "cannot draw " + std::to_string(count) + " of " +
                                                std::to_string(catalog.size()) + " presets");
  }
  std::vector<std::size_t> order(catalog.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(order.size() - i);
    std::swap(order[i], order[j]);
  }
  std::vector<Preset> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(catalog[order[i]]);
  return out;
}

nlohmann::ordered_json catalog_to_json(const std::vector<Preset>& catalog) {
  auto presets = nlohmann::ordered_json::array();
  for (const auto& p : catalog) {
    nlohmann::ordered_json j;
    j["name"] = p.name;
    j["category"] = std::string(to_string(p.category));
    j["params"] = params_to_json(p.params);
    presets.push_back(std::move(j));
  }
  nlohmann::ordered_json root;
  root["reference_width"] = kReferenceWidth;
  root["reference_height"] = kReferenceHeight;
  root["presets"] = std::move(presets);
  return root;
}

std::vector<Preset> catalog_from_json(const nlohmann::json& j) {
  const auto presets = j.find("presets");
  if (presets == j.end() || !presets->is_array()) {
    throw Error(ErrorKind::MissingField, "catalog needs a 'presets' array");
  }
  std::vector<Preset> out;
  for (const auto& e : *presets) {
    if (!e.contains("name") || !e.contains("category") || !e.contains("params")) {
      throw Error(ErrorKind::MissingField, "preset needs 'name', 'category' and 'params'");
    }
    Preset p;
    p.name = e["name"].get<std::string>();
    p.category = category_from_string(e["category"].get<std::string>());
    p.params = params_from_json(e["params"]);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Preset> load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  return catalog_from_json(j);
}

void save_catalog(const std::filesystem::path& path, const std::vector<Preset>& catalog) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::WriteFailure, path.string());
  out << catalog_to_json(catalog).dump(2) << '\n';
}

CameraParamsd default_baseline(int width, int height) {
  CameraParamsd p;
  p.intrinsics = {width / 2.0, width / 2.0, (width - 1) / 2.0, (height - 1) / 2.0};
  p.distortion << 1, 0, 0, 0, 0;
  return p;
}

template <typename Sample>
SweepResult<Sample> sweep_parameter(const SweepSpec& spec, const ImageBuffer<Sample>& img) {
  if (!(spec.lo < spec.hi) || spec.steps < 2 || spec.coefficients.empty()) {
    throw Error(ErrorKind::EmptyRange, "sweep needs lo < hi, steps >= 2 and a coefficient");
  }
  for (int c : spec.coefficients) {
    if (c < 1 || c > 5) throw Error(ErrorKind::InvalidArgument, "coefficient index must be 1..5");
  }
  const int rows = int(spec.coefficients.size());
  const int w = img.width();
  const int h = img.height();
  SweepResult<Sample> result{ImageBuffer<Sample>(w * spec.steps, h * rows, img.channels()), {}};

  const double step = (spec.hi - spec.lo) / (spec.steps - 1);
  for (int row = 0; row < rows; ++row) {
    for (int col = 0; col < spec.steps; ++col) {
      SweepCell cell;
      cell.coefficient = spec.coefficients[row];
      cell.value = (col == spec.steps - 1) ? spec.hi : spec.lo + col * step;
      cell.params = spec.baseline;
      cell.params.distortion(cell.coefficient - 1) = cell.value;
      cell.admissible = check_monotonic(cell.params.distortion, spec.theta_max);
      if (cell.admissible) {
        const auto fish =
            synthesize_fisheye(img, cell.params, {spec.theta_max, spec.threads});
        for (int y = 0; y < h; ++y) {
          const auto* src = fish.image.data().data() + fish.image.index(0, y);
          std::copy(src, src + std::size_t(w) * img.channels(),
                    result.montage.data().data() + result.montage.index(col * w, row * h + y));
        }
      }
      result.cells.push_back(cell);
    }
  }
  return result;
}

nlohmann::ordered_json sweep_cells_to_json(const std::vector<SweepCell>& cells) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& c : cells) {
    nlohmann::ordered_json j;
    j["coefficient"] = "k" + std::to_string(c.coefficient);
    j["value"] = c.value;
    j["admissible"] = c.admissible;
    j["params"] = params_to_json(c.params);
    out.push_back(std::move(j));
  }
  return out;
}

template SweepResult<std::uint8_t> sweep_parameter(const SweepSpec&, const Image8&);
template SweepResult<float> sweep_parameter(const SweepSpec&, const ImageF&);

}  // namespace fishrect
