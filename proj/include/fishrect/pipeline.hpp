#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fishrect/manifest.hpp"
#include "fishrect/paramlab.hpp"

namespace fishrect {

struct DatasetOptions {
  int per_image_presets = 4;
  std::uint64_t seed = 0;
  double test_fraction = 0.1;
  double theta_max = kDefaultThetaMax;
  int threads = 1;
  std::ostream* log = nullptr;  // skipped-image reasons
};

struct SkippedImage {
  std::string path;
  std::string reason;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::vector<SkippedImage> skipped;
};

/// PNG and JPEG files directly inside `dir`, sorted by file name.
std::vector<std::filesystem::path> list_corpus(const std::filesystem::path& dir);

/// For every corpus image: copies it to perspective/NNNN.png, draws
/// `per_image_presets` distinct presets, scales them to the image size and
/// writes fisheye/NNNN_<preset>.png. The manifest goes to
/// out_dir/manifest.jsonl. round(N * test_fraction) entries are marked test.
DatasetManifest generate_dataset(const std::filesystem::path& corpus_dir,
                                 const std::vector<Preset>& presets,
                                 const std::filesystem::path& out_dir,
                                 const DatasetOptions& options = {});

enum class EvalMode {
  QuickRect,     // rectify with the ground-truth parameters
  FullPipeline,  // rectify with externally predicted parameters
};

enum class SplitFilter { All, Train, Test };

struct EvalOptions {
  EvalMode mode = EvalMode::QuickRect;
  SplitFilter split = SplitFilter::All;
  std::map<std::string, CameraParamsd> predictions;  // by id, FullPipeline only
  double theta_max = kDefaultThetaMax;
  int threads = 1;
};

struct PairResult {
  std::string id;
  std::string preset;
  Category category = Category::Minor;
  double psnr = 0;  // +inf for identical pixels
  double ssim = 0;
};

struct SkippedPair {
  std::string id;
  std::string reason;
};

struct ReportRow {
  std::string label;  // category name or "Full Dataset"
  std::size_t count = 0;
  std::size_t infinite_psnr = 0;  // excluded from mean_psnr
  double mean_psnr = 0;
  double mean_ssim = 0;
};

struct QualityReport {
  EvalMode mode = EvalMode::QuickRect;
  std::vector<ReportRow> rows;  // categories in catalog order, then the overall row
  std::vector<PairResult> pairs;
  std::vector<SkippedPair> skipped;

  const ReportRow& overall() const { return rows.back(); }
};

std::string_view to_string(EvalMode m);

/// Masked PSNR/SSIM between each rectified fisheye and its perspective
/// source. The mask keeps pixels whose rectification draws only on fisheye
/// pixels that received content. Entries that fail are reported, not fatal.
QualityReport evaluate_pairs(const std::vector<ManifestEntry>& entries,
                             const std::filesystem::path& root, const EvalOptions& options = {});

/// Loads the manifest, evaluates and, when `out_path` is set, writes the
/// JSON report there.
QualityReport run_evaluation(const std::filesystem::path& manifest_path,
                             const EvalOptions& options,
                             const std::optional<std::filesystem::path>& out_path = std::nullopt);

nlohmann::ordered_json to_json(const QualityReport& report);
std::string format_table(const QualityReport& report);

/// JSONL of {"id": ..., "params": {...}} records.
std::map<std::string, CameraParamsd> load_predictions(const std::filesystem::path& path);

}  // namespace fishrect
