#include "fishrect/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "fishrect/detail/parallel.hpp"
#include "fishrect/image_io.hpp"
#include "fishrect/metrics.hpp"
#include "fishrect/params_io.hpp"
#include "fishrect/random.hpp"
#include "fishrect/warp.hpp"

namespace fs = std::filesystem;

namespace fishrect {

std::vector<fs::path> list_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::MissingFile, dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return out;
}

namespace {

std::string numbered(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", index);
  return buf;
}

struct ImageJob {
  std::vector<ManifestEntry> entries;
  std::optional<SkippedImage> skipped;
};

}  // namespace

DatasetManifest generate_dataset(const fs::path& corpus_dir, const std::vector<Preset>& presets,
                                 const fs::path& out_dir, const DatasetOptions& options) {
  if (presets.empty()) throw Error(ErrorKind::EmptyPresetList, "no presets given");
  if (options.per_image_presets < 1 || std::size_t(options.per_image_presets) > presets.size()) {
    throw Error(ErrorKind::CountOutOfRange,
                "per-image preset count must be in 1.." + std::to_string(presets.size()));
  }
  if (!(options.test_fraction >= 0 && options.test_fraction <= 1)) {
    throw Error(ErrorKind::InvalidArgument, "test fraction must be in [0, 1]");
  }
  for (const auto& p : presets) {
    if (!p.params.valid() || !check_monotonic(p.params.distortion, options.theta_max)) {
      throw Error(ErrorKind::Inadmissible, "preset '" + p.name + "' is not admissible");
    }
  }
  const auto corpus = list_corpus(corpus_dir);
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "no PNG or JPEG files in " + corpus_dir.string());

  std::error_code ec;
  fs::create_directories(out_dir / "fisheye", ec);
  fs::create_directories(out_dir / "perspective", ec);
  if (ec) throw Error(ErrorKind::WriteFailure, out_dir.string() + ": " + ec.message());

  std::vector<ImageJob> jobs(corpus.size());
  detail::parallel_rows(int(corpus.size()), options.threads, [&](int i) {
    Image8 img;
    try {
      img = read_image(corpus[i]);
    } catch (const Error& e) {
      jobs[i].skipped = SkippedImage{corpus[i].string(), e.message()};
      return;
    }
    if (img.channels() == 1) {
      Image8 rgb(img.width(), img.height(), 3);
      for (std::size_t p = 0; p < img.size(); ++p) {
        for (int c = 0; c < 3; ++c) rgb.data()[p * 3 + c] = img.data()[p];
      }
      img = std::move(rgb);
    }
    const std::string stem = numbered(i);
    const std::string perspective = "perspective/" + stem + ".png";
    write_png(out_dir / perspective, img);

    const std::uint64_t seed = mix_seed(options.seed, std::uint64_t(i));
    for (const auto& preset : sample_presets(presets, options.per_image_presets, seed)) {
      ManifestEntry e;
      e.id = stem + "_" + preset.name;
      e.fisheye_path = "fisheye/" + e.id + ".png";
      e.perspective_path = perspective;
      e.params = scale_to(preset.params, img.width(), img.height());
      e.preset_name = preset.name;
      e.category = preset.category;
      e.seed = seed;
      e.width = img.width();
      e.height = img.height();
      const auto fish = synthesize_fisheye(img, e.params, {options.theta_max, 1});
      write_png(out_dir / e.fisheye_path, fish.image);
      jobs[i].entries.push_back(std::move(e));
    }
  });

  DatasetManifest manifest;
  for (auto& job : jobs) {
    if (job.skipped) {
      if (options.log) *options.log << "skipping " << job.skipped->path << ": " << job.skipped->reason << '\n';
      manifest.skipped.push_back(std::move(*job.skipped));
    }
    for (auto& e : job.entries) manifest.entries.push_back(std::move(e));
  }
  if (manifest.entries.empty()) throw Error(ErrorKind::EmptyCorpus, "no readable images in " + corpus_dir.string());

  // Seeded split: the first round(N * f) entries of a shuffled order are test.
  const std::size_t n = manifest.entries.size();
  const auto n_test = std::size_t(std::llround(double(n) * options.test_fraction));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(options.seed, 0x5917));
  for (std::size_t i = 0; i + 1 < n; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
  for (std::size_t i = 0; i < n_test; ++i) manifest.entries[order[i]].split = Split::Test;

  write_manifest(out_dir / "manifest.jsonl", manifest.entries);
  return manifest;
}

std::string_view to_string(EvalMode m) {
  return m == EvalMode::QuickRect ? "QuickRect" : "FullPipeline";
}

namespace {

struct PairOutcome {
  std::optional<PairResult> result;
  std::optional<SkippedPair> skipped;
};

PairOutcome evaluate_entry(const ManifestEntry& e, const fs::path& root, const EvalOptions& options) {
  PairOutcome out;
  try {
    CameraParamsd used = e.params;
    if (options.mode == EvalMode::FullPipeline) {
      const auto it = options.predictions.find(e.id);
      if (it == options.predictions.end()) {
        throw Error(ErrorKind::MissingField, "no prediction for this id");
      }
      used = it->second;
    }
    const fs::path fish_path = root / e.fisheye_path;
    const fs::path persp_path = root / e.perspective_path;
    if (!fs::exists(fish_path)) throw Error(ErrorKind::MissingFile, e.fisheye_path);
    if (!fs::exists(persp_path)) throw Error(ErrorKind::MissingFile, e.perspective_path);
    const Image8 fish = read_image(fish_path);
    const Image8 truth = read_image(persp_path);
    if (!fish.same_geometry(truth)) {
      throw Error(ErrorKind::DimensionMismatch, "fisheye and perspective sizes differ");
    }
    const WarpOptions wopt{options.theta_max, 1};
    const ValidMask content =
        synthesis_mask(e.params, fish.width(), fish.height(), truth.width(), truth.height(), wopt);
    const auto rect = rectify_image(fish, used, wopt, &content);
    PairResult r;
    r.id = e.id;
    r.preset = e.preset_name;
    r.category = e.category;
    r.psnr = psnr(rect.image, truth, &rect.mask);
    r.ssim = ssim(rect.image, truth, &rect.mask);
    out.result = std::move(r);
  } catch (const Error& ex) {
    out.skipped = SkippedPair{e.id, std::string(to_string(ex.kind())) + ": " + ex.message()};
  }
  return out;
}

ReportRow aggregate(std::string label, const std::vector<const PairResult*>& pairs) {
  ReportRow row;
  row.label = std::move(label);
  row.count = pairs.size();
  CompensatedSum p, s;
  std::size_t finite = 0;
  for (const auto* r : pairs) {
    if (std::isinf(r->psnr)) {
      ++row.infinite_psnr;
    } else {
      p.add(r->psnr);
      ++finite;
    }
    s.add(r->ssim);
  }
  row.mean_psnr = finite ? p.value() / double(finite) : std::numeric_limits<double>::infinity();
  row.mean_ssim = pairs.empty() ? 0 : s.value() / double(pairs.size());
  return row;
}

bool keep(const ManifestEntry& e, SplitFilter f) {
  switch (f) {
    case SplitFilter::All: return true;
    case SplitFilter::Train: return e.split == Split::Train;
    case SplitFilter::Test: return e.split == Split::Test;
  }
  return true;
}

}  // namespace

QualityReport evaluate_pairs(const std::vector<ManifestEntry>& entries, const fs::path& root,
                             const EvalOptions& options) {
  std::vector<const ManifestEntry*> selected;
  for (const auto& e : entries) {
    if (keep(e, options.split)) selected.push_back(&e);
  }
  std::vector<PairOutcome> outcomes(selected.size());
  detail::parallel_rows(int(selected.size()), options.threads,
                        [&](int i) { outcomes[i] = evaluate_entry(*selected[i], root, options); });

  QualityReport report;
  report.mode = options.mode;
  for (auto& o : outcomes) {
    if (o.result) report.pairs.push_back(std::move(*o.result));
    if (o.skipped) report.skipped.push_back(std::move(*o.skipped));
  }
  std::vector<const PairResult*> all;
  for (const auto& p : report.pairs) all.push_back(&p);
  for (Category c : {Category::Minor, Category::FullFrame, Category::Drum, Category::SevereDrum,
                     Category::FullCircle}) {
    std::vector<const PairResult*> members;
    for (const auto* p : all) {
      if (p->category == c) members.push_back(p);
    }
    if (!members.empty()) report.rows.push_back(aggregate(std::string(to_string(c)), members));
  }
  report.rows.push_back(aggregate("Full Dataset", all));
  return report;
}

QualityReport run_evaluation(const fs::path& manifest_path, const EvalOptions& options,
                             const std::optional<fs::path>& out_path) {
  const auto entries = load_manifest(manifest_path, options.theta_max);
  auto report = evaluate_pairs(entries, manifest_path.parent_path(), options);
  if (out_path) {
    std::ofstream out(*out_path, std::ios::binary);
    if (!out) throw Error(ErrorKind::WriteFailure, out_path->string());
    out << to_json(report).dump(2) << '\n';
  }
  return report;
}

namespace {

nlohmann::ordered_json psnr_json(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

}  // namespace

nlohmann::ordered_json to_json(const QualityReport& report) {
  nlohmann::ordered_json j;
  j["mode"] = std::string(to_string(report.mode));
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["label"] = r.label;
    row["count"] = r.count;
    row["infinite_psnr"] = r.infinite_psnr;
    row["mean_psnr"] = psnr_json(r.mean_psnr);
    row["mean_ssim"] = r.mean_ssim;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& p : report.pairs) {
    nlohmann::ordered_json row;
    row["id"] = p.id;
    row["preset"] = p.preset;
    row["category"] = std::string(to_string(p.category));
    row["psnr"] = psnr_json(p.psnr);
    row["ssim"] = p.ssim;
    pairs.push_back(std::move(row));
  }
  j["pairs"] = std::move(pairs);
  auto skipped = nlohmann::ordered_json::array();
  for (const auto& s : report.skipped) skipped.push_back({{"id", s.id}, {"reason", s.reason}});
  j["skipped"] = std::move(skipped);
  return j;
}

std::string format_table(const QualityReport& report) {
  std::size_t width = 12;
  for (const auto& r : report.rows) width = std::max(width, r.label.size());
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %6s  %9s  %8s  %5s\n", int(width), "Category", "Count",
                "AVG. PSNR", "AVG. SSIM", "Inf");
  out += line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-*s  %6zu  %9.3f  %8.4f  %5zu\n", int(width),
                  r.label.c_str(), r.count, r.mean_psnr, r.mean_ssim, r.infinite_psnr);
    out += line;
  }
  if (!report.skipped.empty()) {
    std::snprintf(line, sizeof line, "(%zu pairs skipped)\n", report.skipped.size());
    out += line;
  }
  return out;
}

std::map<std::string, CameraParamsd> load_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  std::map<std::string, CameraParamsd> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.contains("id") || !j.contains("params")) {
        throw Error(ErrorKind::MissingField, "prediction needs 'id' and 'params'");
      }
      out[j["id"].get<std::string>()] = params_from_json(j["params"]);
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorKind::ParseError, where + ex.what());
    } catch (const Error& ex) {
      throw Error(ex.kind(), where + ex.message());
    }
  }
  return out;
}

}  // namespace fishrect
