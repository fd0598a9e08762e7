#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "fishrect/image_io.hpp"
#include "fishrect/paramlab.hpp"
#include "fishrect/params_io.hpp"
#include "fishrect/warp.hpp"

using namespace fishrect;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::IoError;
}

fs::path temp_dir(const char* name) {
  const auto dir = fs::temp_directory_path() / ("fishrect_paramlab_" + std::string(name));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("catalog") {
  const auto catalog = preset_catalog();
  CHECK(catalog.size() == 12);
  CHECK(preset_catalog() == catalog);
  std::set<Category> cats;
  std::set<std::string> names;
  for (const auto& p : catalog) {
    CAPTURE(p.name);
    CHECK(check_monotonic(p.params.distortion, kDefaultThetaMax));
    CHECK(p.params.valid());
    CHECK(p.params.distortion(0) >= 0.2);
    CHECK(p.params.distortion(0) <= 1.0);
    for (int i = 1; i < 5; ++i) {
      CHECK(std::abs(p.params.distortion(i)) <= 0.05);
      CHECK(p.params.distortion(i) != 0);
    }
    cats.insert(p.category);
    names.insert(p.name);
  }
  CHECK(names.size() == 12);
  for (Category c : {Category::Minor, Category::FullFrame, Category::Drum, Category::FullCircle}) {
    CHECK(cats.count(c) == 1);
  }
  for (Category c : cats) CHECK(category_from_string(to_string(c)) == c);
  CHECK(kind_of([] { category_from_string("Wide"); }) == ErrorKind::ParseError);
}

TEST_CASE("scaling to a raster") {
  const auto p = preset_catalog()[0].params;
  const auto same = scale_to(p, kReferenceWidth, kReferenceHeight);
  CHECK(same == p);
  const auto big = scale_to(p, 512, 384);
  CHECK(big.intrinsics.fx == 2 * p.intrinsics.fx);
  CHECK(big.intrinsics.fy == 1.5 * p.intrinsics.fy);
  CHECK(big.intrinsics.cx == 255.5);
  CHECK(big.intrinsics.cy == 191.5);
  CHECK(big.distortion == p.distortion);
}

TEST_CASE("sampling presets") {
  const auto catalog = preset_catalog();
  auto all = sample_presets(catalog, 12, 3);
  CHECK(all.size() == 12);
  std::set<std::string> seen;
  for (const auto& p : all) seen.insert(p.name);
  CHECK(seen.size() == 12);

  CHECK(sample_presets(catalog, 4, 99) == sample_presets(catalog, 4, 99));
  CHECK(sample_presets(catalog, 4, 99) != sample_presets(catalog, 4, 100));
  CHECK(kind_of([&] { sample_presets(catalog, 13, 1); }) == ErrorKind::CountOutOfRange);
  CHECK(kind_of([&] { sample_presets(catalog, 0, 1); }) == ErrorKind::CountOutOfRange);

  SUBCASE("inclusion frequency over many seeds") {
    const int seeds = 10000, count = 4;
    std::map<std::string, int> hits;
    for (int s = 0; s < seeds; ++s) {
      const auto pick = sample_presets(catalog, count, std::uint64_t(s));
      std::set<std::string> distinct;
      for (const auto& p : pick) {
        ++hits[p.name];
        distinct.insert(p.name);
      }
      REQUIRE(distinct.size() == std::size_t(count));
    }
    const double q = double(count) / 12;
    const double expected = seeds * q;
    const double sigma = std::sqrt(seeds * q * (1 - q));
    for (const auto& p : catalog) {
      CAPTURE(p.name);
      CHECK(std::abs(hits[p.name] - expected) <= 3 * sigma);
    }
  }
}

TEST_CASE("catalog json") {
  const auto catalog = preset_catalog();
  CHECK(catalog_from_json(catalog_to_json(catalog)) == catalog);
  const auto dir = temp_dir("catalog");
  save_catalog(dir / "c.json", catalog);
  CHECK(load_catalog(dir / "c.json") == catalog);
  CHECK(load_catalog(FISHRECT_TEST_DATA "/presets.json") == catalog);
  CHECK(kind_of([&] { load_catalog(dir / "missing.json"); }) == ErrorKind::MissingFile);
  std::ofstream(dir / "bad.json") << "{\"presets\": 3}";
  CHECK(kind_of([&] { load_catalog(dir / "bad.json"); }) == ErrorKind::MissingField);
  std::ofstream(dir / "broken.json") << "{\"presets\": [";
  CHECK(kind_of([&] { load_catalog(dir / "broken.json"); }) == ErrorKind::ParseError);
}

TEST_CASE("params json") {
  CameraParamsd p;
  p.intrinsics = {120.5, 119.25, 63.5, 64};
  p.distortion << 0.9, -0.01, 0.002, 0.0001, -3e-5;
  CHECK(params_from_json(params_to_json(p)) == p);
  CHECK(params_to_json(p).dump() ==
        R"({"fx":120.5,"fy":119.25,"cx":63.5,"cy":64.0,"k":[0.9,-0.01,0.002,0.0001,-3e-05]})");

  auto j = nlohmann::json::parse(params_to_json(p).dump());
  j.erase("cy");
  try {
    params_from_json(j);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingField);
    CHECK(std::string(e.what()).find("cy") != std::string::npos);
  }
  j = nlohmann::json::parse(params_to_json(p).dump());
  j["k"].erase(4);
  CHECK(kind_of([&] { params_from_json(j); }) == ErrorKind::MissingField);
  j = nlohmann::json::parse(params_to_json(p).dump());
  j["fx"] = "wide";
  CHECK(kind_of([&] { params_from_json(j); }) == ErrorKind::ParseError);
  j = nlohmann::json::parse(params_to_json(p).dump());
  j["fy"] = -2;
  try {
    params_from_json(j);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
    CHECK(std::string(e.what()).find("fy") != std::string::npos);
  }

  const auto dir = temp_dir("params");
  save_params(dir / "p.json", p);
  CHECK(load_params(dir / "p.json") == p);
}

TEST_CASE("parameter sweep") {
  const auto img = read_image(FISHRECT_TEST_DATA "/scene_256.png");
  Image8 small(64, 48, 3);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      for (int c = 0; c < 3; ++c) small.at(x, y, c) = img.at(x * 4, y * 5, c);
    }
  }
  SweepSpec spec;
  CHECK(spec.lo == -0.9);
  CHECK(spec.hi == 1.0);
  spec.baseline = default_baseline(64, 48);
  spec.baseline.distortion << 1, 0, 0, 0, 0;
  const auto result = sweep_parameter(spec, small);
  CHECK(result.montage.width() == 64 * 8);
  CHECK(result.montage.height() == 48);
  REQUIRE(result.cells.size() == 8);
  CHECK(result.cells.front().value == -0.9);
  CHECK_FALSE(result.cells.front().admissible);
  CHECK(result.cells.back().value == 1.0);
  CHECK(result.cells.back().admissible);

  // last cell is the plain synthesis with k = (1, 0, 0, 0, 0)
  const auto direct = synthesize_fisheye(small, spec.baseline);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      for (int c = 0; c < 3; ++c) CHECK(result.montage.at(7 * 64 + x, y, c) == direct.image.at(x, y, c));
    }
  }
  // inadmissible cells stay at fill
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) CHECK(result.montage.at(x, y, 0) == 0);
  }
  for (const auto& cell : result.cells) {
    CHECK(cell.admissible == check_monotonic(cell.params.distortion, kDefaultThetaMax));
  }
  const auto j = sweep_cells_to_json(result.cells);
  CHECK(j.size() == 8);
  CHECK(j[0]["coefficient"] == "k1");

  SUBCASE("two rows") {
    SweepSpec two = spec;
    two.coefficients = {2, 3};
    two.lo = -0.05;
    two.hi = 0.05;
    two.steps = 3;
    const auto r = sweep_parameter(two, small);
    CHECK(r.montage.width() == 3 * 64);
    CHECK(r.montage.height() == 2 * 48);
    CHECK(r.cells[4].coefficient == 3);
    CHECK(r.cells[4].value == doctest::Approx(0.0));
  }
  SUBCASE("bad specs") {
    SweepSpec bad = spec;
    bad.lo = 1;
    bad.hi = 1;
    CHECK(kind_of([&] { sweep_parameter(bad, small); }) == ErrorKind::EmptyRange);
    bad = spec;
    bad.coefficients = {6};
    CHECK(kind_of([&] { sweep_parameter(bad, small); }) == ErrorKind::InvalidArgument);
  }
}
