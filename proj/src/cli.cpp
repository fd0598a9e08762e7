#include "fishrect/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "fishrect/image_io.hpp"
#include "fishrect/metrics.hpp"
#include "fishrect/nn/calibration.hpp"
#include "fishrect/nn/receptive_field.hpp"
#include "fishrect/nn/wgan.hpp"
#include "fishrect/paramlab.hpp"
#include "fishrect/params_io.hpp"
#include "fishrect/pipeline.hpp"
#include "fishrect/warp.hpp"

namespace fs = std::filesystem;

namespace fishrect {

namespace {

int default_threads() {
  if (const char* env = std::getenv("FISHRECT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return int(std::max(1u, std::thread::hardware_concurrency()));
}

bool is_input_error(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::ParseError:
    case ErrorKind::MissingField:
    case ErrorKind::Inadmissible:
    case ErrorKind::InvalidSpec:
    case ErrorKind::CountOutOfRange:
    case ErrorKind::EmptyRange:
    case ErrorKind::EmptyPresetList:
    case ErrorKind::TooFewSamples:
      return true;
    default:
      return false;
  }
}

struct Common {
  int threads = default_threads();
  std::uint64_t seed = 0;
  bool json = false;
  double theta_max = kDefaultThetaMax;
};

void add_threads(CLI::App* app, Common& c) {
  app->add_option("--threads", c.threads, "Worker threads (default: FISHRECT_THREADS or all cores)")
      ->check(CLI::PositiveNumber);
}
void add_seed(CLI::App* app, Common& c) { app->add_option("--seed", c.seed, "Random seed"); }
void add_json(CLI::App* app, Common& c) {
  app->add_flag("--json", c.json, "Print structured output as JSON");
}
void add_theta(CLI::App* app, Common& c) {
  app->add_option("--theta-max", c.theta_max, "Largest incidence angle in radians")
      ->check(CLI::Range(1e-3, 1.5));
}

int coefficient_index(const std::string& s) {
  if (s.size() == 2 && (s[0] == 'k' || s[0] == 'K') && s[1] >= '1' && s[1] <= '5') return s[1] - '0';
  throw Error(ErrorKind::InvalidArgument, "--coeff expects k1..k5, got '" + s + "'");
}

std::vector<Preset> presets_or_catalog(const std::string& path) {
  return path.empty() ? preset_catalog() : load_catalog(path);
}

std::vector<double> read_numbers(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, path.string() + ": not a number: '" + tok + "'");
    }
  }
  return out;
}

std::map<std::string, double> report_metric(const fs::path& path, const std::string& metric) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  if (!j.contains("pairs")) throw Error(ErrorKind::MissingField, path.string() + ": missing 'pairs'");
  std::map<std::string, double> out;
  for (const auto& p : j["pairs"]) {
    if (!p.contains("id") || !p.contains(metric)) {
      throw Error(ErrorKind::MissingField, path.string() + ": pair without 'id' or '" + metric + "'");
    }
    const auto& v = p[metric];
    out[p["id"].get<std::string>()] =
        v.is_string() ? std::numeric_limits<double>::infinity() : v.get<double>();
  }
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fisheye camera geometry toolkit", "fishrect"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fishrect 1.0");
  Common common;

  // synthesize / rectify
  std::string params_path, in_path, out_path, mask_path, content_mask_path;
  auto* synth = app.add_subcommand("synthesize", "Warp a perspective image into a fisheye image");
  synth->add_option("--params", params_path, "Camera parameters JSON")->required();
  synth->add_option("--in", in_path, "Perspective image (PNG or JPEG)")->required();
  synth->add_option("--out", out_path, "Fisheye PNG")->required();
  synth->add_option("--mask", mask_path, "Write the content mask PNG");
  add_threads(synth, common);
  add_theta(synth, common);

  auto* rect = app.add_subcommand("rectify", "Rectify a fisheye image back to perspective");
  rect->add_option("--params", params_path, "Camera parameters JSON")->required();
  rect->add_option("--in", in_path, "Fisheye image (PNG or JPEG)")->required();
  rect->add_option("--out", out_path, "Rectified PNG")->required();
  rect->add_option("--mask", mask_path, "Write the validity mask PNG");
  rect->add_option("--content-mask", content_mask_path,
                   "Mask PNG of fisheye pixels holding content (e.g. from synthesize --mask)");
  add_threads(rect, common);
  add_theta(rect, common);

  // sweep
  std::vector<std::string> coeffs{"k1"};
  double lo = -0.9, hi = 1.0;
  int steps = 8;
  std::string json_out;
  auto* sweep = app.add_subcommand("sweep", "Montage of fisheyes while one coefficient varies");
  sweep->add_option("--coeff", coeffs, "Coefficient(s) to vary, k1..k5; one row each")
      ->delimiter(',');
  sweep->add_option("--lo", lo, "First value");
  sweep->add_option("--hi", hi, "Last value");
  sweep->add_option("--steps", steps, "Number of values")->check(CLI::Range(2, 64));
  sweep->add_option("--in", in_path, "Perspective image")->required();
  sweep->add_option("--out", out_path, "Montage PNG")->required();
  sweep->add_option("--params-out", json_out, "Per-cell parameters JSON (default: <out>.json)");
  sweep->add_option("--params", params_path, "Baseline parameters JSON (default: f = w/2, k = (1,0,0,0,0))");
  add_threads(sweep, common);
  add_theta(sweep, common);
  add_json(sweep, common);

  // presets
  int sample_count = 0;
  std::string catalog_path;
  auto* presets = app.add_subcommand("presets", "List or sample the distortion preset catalog");
  presets->add_option("--catalog", catalog_path, "Catalog JSON (default: built-in)");
  presets->add_option("--sample", sample_count, "Draw this many distinct presets");
  presets->add_option("--out", out_path, "Write the (sampled) catalog JSON");
  add_seed(presets, common);
  add_json(presets, common);

  // dataset
  std::string corpus_dir, out_dir;
  int per_image = 4;
  double test_fraction = 0.1;
  auto* dataset = app.add_subcommand("dataset", "Build fisheye/perspective pairs and a manifest");
  dataset->add_option("--corpus", corpus_dir, "Directory of perspective images")->required();
  dataset->add_option("--out", out_dir, "Output directory")->required();
  dataset->add_option("--catalog", catalog_path, "Catalog JSON (default: built-in)");
  dataset->add_option("--per-image", per_image, "Presets drawn per image");
  dataset->add_option("--test-fraction", test_fraction, "Share of entries marked test")
      ->check(CLI::Range(0.0, 1.0));
  add_seed(dataset, common);
  add_threads(dataset, common);
  add_theta(dataset, common);
  add_json(dataset, common);

  // evaluate
  std::string manifest_path, mode = "quick", predictions_path, split = "all";
  auto* evaluate = app.add_subcommand("evaluate", "Masked PSNR/SSIM report over a manifest");
  evaluate->add_option("--manifest", manifest_path, "manifest.jsonl")->required();
  evaluate->add_option("--mode", mode, "quick (ground-truth parameters) or full (predictions)")
      ->check(CLI::IsMember({"quick", "full"}));
  evaluate->add_option("--predictions", predictions_path, "JSONL of {id, params} for --mode full");
  evaluate->add_option("--split", split, "Entries to evaluate")
      ->check(CLI::IsMember({"all", "train", "test"}));
  evaluate->add_option("--out", out_path, "Write the JSON report");
  add_threads(evaluate, common);
  add_theta(evaluate, common);
  add_json(evaluate, common);

  // ci
  std::string diffs_path, report_a, report_b, metric = "psnr";
  double level = 0.95;
  auto* ci = app.add_subcommand("ci", "Confidence interval of paired differences");
  auto* diffs_opt = ci->add_option("--diffs", diffs_path, "Whitespace-separated differences");
  auto* a_opt = ci->add_option("--a", report_a, "First evaluation report JSON");
  auto* b_opt = ci->add_option("--b", report_b, "Second evaluation report JSON");
  a_opt->needs(b_opt);
  b_opt->needs(a_opt);
  diffs_opt->excludes(a_opt);
  ci->add_option("--metric", metric, "Report metric to pair (a - b)")
      ->check(CLI::IsMember({"psnr", "ssim"}));
  ci->add_option("--level", level, "Confidence level")->check(CLI::Range(0.5, 0.9999));
  add_json(ci, common);

  // train-toy
  nn::TrainConfig train_cfg;
  double offset = 3.0;
  int hidden = 16;
  std::string trace_path, model_path;
  auto* train = app.add_subcommand("train-toy", "WGAN training on the 1-D shift task");
  train->add_option("--steps", train_cfg.steps, "Generator updates")->check(CLI::NonNegativeNumber);
  train->add_option("--critic-iters", train_cfg.critic_iters, "Critic updates per generator update")
      ->check(CLI::PositiveNumber);
  train->add_option("--batch", train_cfg.batch, "Batch size")->check(CLI::PositiveNumber);
  train->add_option("--clip", train_cfg.clip, "Critic weight clip bound");
  train->add_option("--lambda", train_cfg.lambda, "L1 weight");
  train->add_option("--alpha-critic", train_cfg.alpha_critic, "Critic learning rate");
  train->add_option("--alpha-generator", train_cfg.alpha_generator, "Generator learning rate");
  train->add_option("--offset", offset, "Target shift");
  train->add_option("--hidden", hidden, "Hidden layer width")->check(CLI::PositiveNumber);
  train->add_option("--trace", trace_path, "Write the loss trace CSV");
  train->add_option("--model", model_path, "Write the generator JSON");
  add_seed(train, common);
  add_json(train, common);

  // calibrate-toy
  nn::CalibConfig calib_cfg;
  nn::CalibLossConfig calib_loss;
  std::string family = "k1";
  int train_count = 2000, val_count = 500;
  auto* calib = app.add_subcommand("calibrate-toy", "Regress camera parameters from radial profiles");
  calib->add_option("--family", family, "k1 (only k1 varies) or full")
      ->check(CLI::IsMember({"k1", "full"}));
  calib->add_option("--beta", calib_loss.beta, "Weight on the k1 term");
  calib->add_option("--steps", calib_cfg.steps, "Training steps")->check(CLI::NonNegativeNumber);
  calib->add_option("--batch", calib_cfg.batch, "Batch size")->check(CLI::PositiveNumber);
  calib->add_option("--alpha", calib_cfg.alpha, "Initial learning rate");
  calib->add_option("--hidden", calib_cfg.hidden, "Hidden layer width")->check(CLI::PositiveNumber);
  calib->add_option("--train", train_count, "Training samples")->check(CLI::PositiveNumber);
  calib->add_option("--val", val_count, "Validation samples")->check(CLI::PositiveNumber);
  calib->add_option("--model", model_path, "Write the regressor JSON");
  add_seed(calib, common);
  add_json(calib, common);

  // rf
  std::string layers;
  std::vector<int> strides;
  auto* rf = app.add_subcommand("rf", "Receptive field of a convolution stack");
  auto* layers_opt = rf->add_option("--layers", layers, "Layer specs KxKsS[pP], comma separated");
  auto* strides_opt =
      rf->add_option("--strides", strides, "Five strides for a 4x4 patch critic")->delimiter(',');
  layers_opt->excludes(strides_opt);
  add_json(rf, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) {
      const auto params = load_params(params_path);
      const auto img = read_image(in_path);
      const auto result = synthesize_fisheye(img, params, {common.theta_max, common.threads});
      write_png(out_path, result.image);
      if (!mask_path.empty()) write_mask_png(mask_path, result.mask);
    } else if (*rect) {
      const auto params = load_params(params_path);
      const auto img = read_image(in_path);
      std::optional<ValidMask> content;
      if (!content_mask_path.empty()) content = read_mask_png(content_mask_path);
      const auto result = rectify_image(img, params, {common.theta_max, common.threads},
                                        content ? &*content : nullptr);
      write_png(out_path, result.image);
      if (!mask_path.empty()) write_mask_png(mask_path, result.mask);
    } else if (*sweep) {
      const auto img = read_image(in_path);
      SweepSpec spec;
      spec.coefficients.clear();
      for (const auto& c : coeffs) spec.coefficients.push_back(coefficient_index(c));
      spec.lo = lo;
      spec.hi = hi;
      spec.steps = steps;
      spec.baseline = params_path.empty() ? default_baseline(img.width(), img.height())
                                          : load_params(params_path);
      spec.theta_max = common.theta_max;
      spec.threads = common.threads;
      const auto result = sweep_parameter(spec, img);
      write_png(out_path, result.montage);
      const auto cells = sweep_cells_to_json(result.cells);
      const std::string cells_path = json_out.empty() ? out_path + ".json" : json_out;
      std::ofstream(cells_path) << cells.dump(2) << '\n';
      if (common.json) out << cells.dump(2) << '\n';
    } else if (*presets) {
      auto catalog = presets_or_catalog(catalog_path);
      if (sample_count != 0) catalog = sample_presets(catalog, sample_count, common.seed);
      const auto j = catalog_to_json(catalog);
      if (!out_path.empty()) save_catalog(out_path, catalog);
      if (common.json) {
        out << j.dump(2) << '\n';
      } else {
        for (const auto& p : catalog) {
          char line[200];
          const auto& k = p.params.distortion;
          std::snprintf(line, sizeof line, "%-14s %-10s f=%-6g k=(%g, %g, %g, %g, %g)\n",
                        p.name.c_str(), std::string(to_string(p.category)).c_str(),
                        p.params.intrinsics.fx, k(0), k(1), k(2), k(3), k(4));
          out << line;
        }
      }
    } else if (*dataset) {
      DatasetOptions opt;
      opt.per_image_presets = per_image;
      opt.seed = common.seed;
      opt.test_fraction = test_fraction;
      opt.theta_max = common.theta_max;
      opt.threads = common.threads;
      opt.log = &err;
      const auto m = generate_dataset(corpus_dir, presets_or_catalog(catalog_path), out_dir, opt);
      std::size_t n_test = 0;
      for (const auto& e : m.entries) n_test += e.split == Split::Test;
      if (common.json) {
        nlohmann::ordered_json j;
        j["manifest"] = (fs::path(out_dir) / "manifest.jsonl").string();
        j["entries"] = m.entries.size();
        j["test"] = n_test;
        j["skipped"] = m.skipped.size();
        out << j.dump(2) << '\n';
      } else {
        out << m.entries.size() << " entries (" << n_test << " test), " << m.skipped.size()
            << " images skipped\n";
      }
    } else if (*evaluate) {
      EvalOptions opt;
      opt.mode = mode == "full" ? EvalMode::FullPipeline : EvalMode::QuickRect;
      opt.split = split == "train" ? SplitFilter::Train
                  : split == "test" ? SplitFilter::Test
                                    : SplitFilter::All;
      if (opt.mode == EvalMode::FullPipeline) {
        if (predictions_path.empty()) {
          throw Error(ErrorKind::InvalidArgument, "--mode full requires --predictions");
        }
        opt.predictions = load_predictions(predictions_path);
      }
      opt.theta_max = common.theta_max;
      opt.threads = common.threads;
      std::optional<fs::path> dest;
      if (!out_path.empty()) dest = out_path;
      const auto report = run_evaluation(manifest_path, opt, dest);
      if (common.json) {
        out << to_json(report).dump(2) << '\n';
      } else {
        out << format_table(report);
      }
    } else if (*ci) {
      std::vector<double> diffs;
      if (!diffs_path.empty()) {
        diffs = read_numbers(diffs_path);
      } else if (!report_a.empty()) {
        const auto a = report_metric(report_a, metric);
        const auto b = report_metric(report_b, metric);
        for (const auto& [id, va] : a) {
          const auto it = b.find(id);
          if (it == b.end() || std::isinf(va) || std::isinf(it->second)) continue;
          diffs.push_back(va - it->second);
        }
      } else {
        throw Error(ErrorKind::InvalidArgument, "give --diffs or --a/--b");
      }
      const auto interval = paired_diff_ci(diffs, level);
      if (common.json) {
        out << to_json(interval).dump(2) << '\n';
      } else {
        char line[200];
        std::snprintf(line, sizeof line, "mean %.6f  %g%% CI [%.6f, %.6f]  half-width %.6f  n=%zu  %s\n",
                      interval.mean, level * 100, interval.lower, interval.upper,
                      interval.half_width, interval.n,
                      interval.contains_zero() ? "contains 0" : "excludes 0");
        out << line;
      }
    } else if (*train) {
      train_cfg.seed = common.seed;
      try {
        const auto r = nn::run_shift_task(offset, train_cfg, hidden);
        if (!trace_path.empty()) nn::write_trace_csv(trace_path, r.training.trace);
        if (!model_path.empty()) {
          std::ofstream(model_path) << nn::to_json(r.training.generator).dump(2) << '\n';
        }
        const auto& last = r.training.trace.empty() ? nn::TraceRow{} : r.training.trace.back();
        if (common.json) {
          nlohmann::ordered_json j;
          j["steps"] = train_cfg.steps;
          j["seed"] = train_cfg.seed;
          j["target_shift"] = offset;
          j["mean_shift"] = r.mean_shift;
          j["final_l1"] = last.l1;
          j["final_critic_loss"] = last.critic_loss;
          j["max_abs_critic"] = r.training.critic.max_abs_parameter();
          out << j.dump(2) << '\n';
        } else {
          char line[200];
          std::snprintf(line, sizeof line, "mean shift %.4f (target %g)  L1 %.4f  L_D %.3g\n",
                        r.mean_shift, offset, last.l1, last.critic_loss);
          out << line;
        }
      } catch (const nn::DivergenceError& e) {
        if (!trace_path.empty()) nn::write_trace_csv(trace_path, e.trace());
        throw;
      }
    } else if (*calib) {
      const auto fam = family == "full" ? nn::CalibFamily::Full : nn::CalibFamily::K1Only;
      calib_cfg.seed = common.seed;
      const auto train_set = nn::make_calibration_set(fam, train_count, mix_seed(common.seed, 10),
                                                      common.theta_max);
      const auto val_set =
          nn::make_calibration_set(fam, val_count, mix_seed(common.seed, 11), common.theta_max);
      const auto r = nn::calibrate_toy(train_set, val_set, calib_cfg, calib_loss);
      if (!model_path.empty()) std::ofstream(model_path) << nn::to_json(r.regressor).dump(2) << '\n';
      if (common.json) {
        nlohmann::ordered_json j;
        j["family"] = family;
        j["beta"] = calib_loss.beta;
        j["steps"] = calib_cfg.steps;
        j["seed"] = calib_cfg.seed;
        j["k1_error"] = r.validation_k1_error;
        j["baseline_k1_error"] = r.baseline_k1_error;
        j["validation_loss"] = r.validation_loss;
        out << j.dump(2) << '\n';
      } else {
        char line[200];
        std::snprintf(line, sizeof line, "validation mean |dk1| %.6f (untrained %.6f)\n",
                      r.validation_k1_error, r.baseline_k1_error);
        out << line;
      }
    } else if (*rf) {
      std::vector<nn::ConvLayerSpec> stack;
      if (!layers.empty()) {
        stack = nn::parse_layer_stack(layers);
      } else if (!strides.empty()) {
        stack = nn::patch_critic_stack(strides);
      } else {
        const int table[] = {2, 2, 2, 1, 1};
        stack = nn::patch_critic_stack(table);
      }
      const auto fields = nn::receptive_field(stack);
      const auto note = nn::receptive_field_note(stack);
      if (common.json) {
        out << nlohmann::json(fields).dump() << '\n';
      } else {
        for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? " " : "") << fields[i];
        out << '\n';
      }
      if (note) err << *note << '\n';
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_input_error(e.kind()) ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace fishrect
