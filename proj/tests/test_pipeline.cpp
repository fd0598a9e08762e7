#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fishrect/image_io.hpp"
#include "fishrect/manifest.hpp"
#include "fishrect/params_io.hpp"
#include "fishrect/pipeline.hpp"
#include "fishrect/scene.hpp"

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

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("fishrect_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path make_corpus(const fs::path& dir, int count, int size = 128) {
  fs::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%03d.png", i);
    write_png(dir / name, make_scene(size, size, 100 + i));
  }
  return dir;
}

// Every file under `dir`, relative path to contents.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& f : fs::recursive_directory_iterator(dir)) {
    if (f.is_regular_file()) out[fs::relative(f.path(), dir).string()] = slurp(f.path());
  }
  return out;
}

}  // namespace

TEST_CASE("corpus listing") {
  TempDir tmp("listing");
  make_corpus(tmp.path, 3);
  std::ofstream(tmp.path / "notes.txt") << "x";
  fs::copy_file(tmp.path / "scene_000.png", tmp.path / "a.jpg");
  const auto files = list_corpus(tmp.path);
  REQUIRE(files.size() == 4);
  CHECK(files[0].filename() == "a.jpg");
  CHECK(files[3].filename() == "scene_002.png");
  CHECK(kind_of([&] { list_corpus(tmp.path / "nope"); }) == ErrorKind::MissingFile);
}

TEST_CASE("dataset generation") {
  TempDir tmp("dataset");
  const auto corpus = make_corpus(tmp.path / "corpus", 10);
  DatasetOptions opts;
  opts.seed = 5;
  const auto out = tmp.path / "out";
  const auto ds = generate_dataset(corpus, preset_catalog(), out, opts);

  REQUIRE(ds.entries.size() == 40);
  CHECK(ds.skipped.empty());
  CHECK(missing_files(ds.entries, out).empty());

  std::set<std::string> ids;
  std::map<std::string, std::set<std::string>> presets_per_image;
  int test_count = 0;
  for (const auto& e : ds.entries) {
    ids.insert(e.id);
    presets_per_image[e.perspective_path].insert(e.preset_name);
    CHECK(e.width == 128);
    CHECK(e.height == 128);
    CHECK(check_monotonic(e.params.distortion, kDefaultThetaMax));
    if (e.split == Split::Test) ++test_count;
    const auto fish = read_image(out / e.fisheye_path);
    CHECK(fish.width() == 128);
    CHECK(fish.channels() == 3);
  }
  CHECK(ids.size() == 40);
  CHECK(presets_per_image.size() == 10);
  for (const auto& [img, names] : presets_per_image) CHECK(names.size() == 4);
  CHECK(std::abs(test_count - 4) <= 1);

  SUBCASE("manifest round trip is byte stable") {
    const auto loaded = load_manifest(out / "manifest.jsonl");
    CHECK(loaded == ds.entries);
    write_manifest(tmp.path / "again.jsonl", loaded);
    CHECK(slurp(tmp.path / "again.jsonl") == slurp(out / "manifest.jsonl"));
  }
  SUBCASE("same seed and any thread count reproduce every byte") {
    const auto first = snapshot(out);
    DatasetOptions o2 = opts;
    o2.threads = 4;
    generate_dataset(corpus, preset_catalog(), tmp.path / "out2", o2);
    CHECK(snapshot(tmp.path / "out2") == first);
    o2.seed = 6;
    generate_dataset(corpus, preset_catalog(), tmp.path / "out3", o2);
    CHECK(slurp(tmp.path / "out3" / "manifest.jsonl") != first.at("manifest.jsonl"));
  }
  SUBCASE("quick rectification report") {
    EvalOptions eo;
    eo.threads = 2;
    const auto report = run_evaluation(out / "manifest.jsonl", eo, tmp.path / "report.json");
    REQUIRE(report.rows.size() == 6);
    CHECK(report.overall().label == "Full Dataset");
    CHECK(report.overall().count == 40);
    CHECK(report.skipped.empty());
    CHECK(report.overall().mean_psnr >= 25);
    CHECK(report.overall().mean_ssim >= 0.85);
    std::size_t total = 0;
    for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
      CHECK(report.rows[i].label == to_string(Category(i)));
      total += report.rows[i].count;
    }
    CHECK(total == 40);

    eo.threads = 1;
    const auto again = run_evaluation(out / "manifest.jsonl", eo, tmp.path / "report1.json");
    CHECK(slurp(tmp.path / "report.json") == slurp(tmp.path / "report1.json"));
    CHECK(format_table(report) == format_table(again));

    const auto j = nlohmann::json::parse(slurp(tmp.path / "report.json"));
    CHECK(j["mode"] == "QuickRect");
    CHECK(j["rows"].size() == 6);
    CHECK(j["pairs"].size() == 40);

    const auto table = format_table(report);
    CHECK(table.find("Category") != std::string::npos);
    CHECK(table.find("AVG. PSNR") != std::string::npos);
    CHECK(table.find("AVG. SSIM") != std::string::npos);
    CHECK(table.find("Full Dataset") != std::string::npos);

    SUBCASE("split filter") {
      EvalOptions t;
      t.split = SplitFilter::Test;
      CHECK(run_evaluation(out / "manifest.jsonl", t).overall().count == std::size_t(test_count));
      t.split = SplitFilter::Train;
      CHECK(run_evaluation(out / "manifest.jsonl", t).overall().count == std::size_t(40 - test_count));
    }
    SUBCASE("full pipeline with exact predictions equals quick") {
      EvalOptions f;
      f.mode = EvalMode::FullPipeline;
      for (const auto& e : ds.entries) f.predictions[e.id] = e.params;
      const auto full = run_evaluation(out / "manifest.jsonl", f);
      CHECK(full.overall().mean_psnr == report.overall().mean_psnr);
      CHECK(full.overall().mean_ssim == report.overall().mean_ssim);
    }
    SUBCASE("full pipeline with wrong predictions scores lower") {
      EvalOptions f;
      f.mode = EvalMode::FullPipeline;
      for (const auto& e : ds.entries) {
        auto p = e.params;
        p.distortion(0) *= 1.3;
        f.predictions[e.id] = p;
      }
      f.predictions.erase(ds.entries[0].id);
      const auto full = run_evaluation(out / "manifest.jsonl", f);
      CHECK(full.overall().mean_psnr < report.overall().mean_psnr);
      REQUIRE(full.skipped.size() == 1);
      CHECK(full.skipped[0].id == ds.entries[0].id);
    }
    SUBCASE("predictions file") {
      std::ofstream pf(tmp.path / "pred.jsonl");
      for (const auto& e : ds.entries) {
        pf << nlohmann::json{{"id", e.id}, {"params", params_to_json(e.params)}}.dump() << '\n';
      }
      pf.close();
      const auto preds = load_predictions(tmp.path / "pred.jsonl");
      CHECK(preds.size() == 40);
      CHECK(preds.at(ds.entries[3].id) == ds.entries[3].params);
    }
  }
  SUBCASE("damaged files are skipped, not fatal") {
    std::ofstream(out / ds.entries[1].fisheye_path, std::ios::trunc) << "not a png";
    fs::remove(out / ds.entries[2].fisheye_path);
    const auto report = run_evaluation(out / "manifest.jsonl", {});
    CHECK(report.overall().count == 38);
    CHECK(report.skipped.size() == 2);
    CHECK(format_table(report).find("2 pairs skipped") != std::string::npos);
  }
}

TEST_CASE("dataset errors") {
  TempDir tmp("dataset_errors");
  const auto corpus = make_corpus(tmp.path / "corpus", 2, 64);
  CHECK(kind_of([&] { generate_dataset(corpus, {}, tmp.path / "o"); }) == ErrorKind::EmptyPresetList);
  fs::create_directories(tmp.path / "empty");
  CHECK(kind_of([&] { generate_dataset(tmp.path / "empty", preset_catalog(), tmp.path / "o"); }) ==
        ErrorKind::EmptyCorpus);
  DatasetOptions opts;
  opts.per_image_presets = 13;
  CHECK(kind_of([&] { generate_dataset(corpus, preset_catalog(), tmp.path / "o", opts); }) ==
        ErrorKind::CountOutOfRange);
  opts = {};
  opts.test_fraction = 1.5;
  CHECK(kind_of([&] { generate_dataset(corpus, preset_catalog(), tmp.path / "o", opts); }) ==
        ErrorKind::InvalidArgument);
  auto bad = preset_catalog();
  bad[0].params.distortion(0) = -1;
  CHECK(kind_of([&] { generate_dataset(corpus, bad, tmp.path / "o"); }) == ErrorKind::Inadmissible);

  SUBCASE("unreadable images are reported and the rest proceed") {
    std::ofstream(corpus / "broken.png") << "garbage";
    std::ostringstream log;
    DatasetOptions o;
    o.log = &log;
    const auto ds = generate_dataset(corpus, preset_catalog(), tmp.path / "o", o);
    CHECK(ds.entries.size() == 8);
    REQUIRE(ds.skipped.size() == 1);
    CHECK(log.str().find("broken.png") != std::string::npos);
  }
  SUBCASE("nothing readable") {
    fs::remove_all(corpus);
    fs::create_directories(corpus);
    std::ofstream(corpus / "broken.png") << "garbage";
    CHECK(kind_of([&] { generate_dataset(corpus, preset_catalog(), tmp.path / "o"); }) ==
          ErrorKind::EmptyCorpus);
  }
}

TEST_CASE("flat scene rectifies perfectly") {
  TempDir tmp("flat");
  fs::create_directories(tmp.path / "corpus");
  write_png(tmp.path / "corpus" / "flat.png", Image8(96, 96, 3, 140));
  DatasetOptions opts;
  opts.per_image_presets = 12;
  opts.test_fraction = 0;
  const auto ds = generate_dataset(tmp.path / "corpus", preset_catalog(), tmp.path / "out", opts);
  const auto report = run_evaluation(tmp.path / "out" / "manifest.jsonl", {});
  CHECK(report.overall().count == 12);
  CHECK(report.overall().infinite_psnr == 12);
  CHECK(report.overall().mean_ssim == 1.0);
  for (const auto& p : report.pairs) CHECK(std::isinf(p.psnr));
  const auto j = to_json(report);
  CHECK(j["pairs"][0]["psnr"] == "inf");
}

TEST_CASE("manifest validation") {
  TempDir tmp("manifest");
  ManifestEntry e;
  e.id = "0000_a";
  e.fisheye_path = "fisheye/0000_a.png";
  e.perspective_path = "perspective/0000.png";
  e.params = scale_to(preset_catalog()[0].params, 64, 64);
  e.preset_name = "a";
  e.width = e.height = 64;
  e.seed = 9;
  CHECK(entry_from_json(entry_to_json(e)) == e);

  const auto line = entry_to_json(e).dump();
  auto write_lines = [&](const std::vector<std::string>& lines) {
    std::ofstream out(tmp.path / "m.jsonl");
    for (const auto& l : lines) out << l << '\n';
  };
  auto message_of = [&] {
    try {
      load_manifest(tmp.path / "m.jsonl");
    } catch (const Error& ex) {
      return std::string(ex.what());
    }
    return std::string();
  };

  SUBCASE("missing coefficient") {
    auto j = entry_to_json(e);
    j["params"].erase("cy");
    write_lines({line, "", j.dump()});
    CHECK(kind_of([&] { load_manifest(tmp.path / "m.jsonl"); }) == ErrorKind::MissingField);
    const auto msg = message_of();
    CHECK(msg.find("m.jsonl:3") != std::string::npos);
    CHECK(msg.find("cy") != std::string::npos);
  }
  SUBCASE("bad json") {
    write_lines({line, "{\"id\": "});
    CHECK(kind_of([&] { load_manifest(tmp.path / "m.jsonl"); }) == ErrorKind::ParseError);
    CHECK(message_of().find("m.jsonl:2") != std::string::npos);
  }
  SUBCASE("duplicate id") {
    write_lines({line, line});
    CHECK(kind_of([&] { load_manifest(tmp.path / "m.jsonl"); }) == ErrorKind::ParseError);
  }
  SUBCASE("inadmissible coefficients") {
    auto j = entry_to_json(e);
    j["params"]["k"][0] = -0.5;
    write_lines({j.dump()});
    CHECK(kind_of([&] { load_manifest(tmp.path / "m.jsonl"); }) == ErrorKind::Inadmissible);
  }
  SUBCASE("wrong type") {
    auto j = entry_to_json(e);
    j["seed"] = "nine";
    write_lines({j.dump()});
    CHECK(kind_of([&] { load_manifest(tmp.path / "m.jsonl"); }) == ErrorKind::ParseError);
  }
  SUBCASE("blank lines are ignored") {
    write_lines({"", line, ""});
    CHECK(load_manifest(tmp.path / "m.jsonl").size() == 1);
  }
}
