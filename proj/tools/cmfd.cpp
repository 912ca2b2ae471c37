#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cmfd/dct_detector.hpp"
#include "cmfd/errors.hpp"
#include "cmfd/evaluation.hpp"
#include "cmfd/exact_detector.hpp"
#include "cmfd/forgery_lab.hpp"
#include "cmfd/image.hpp"
#include "cmfd/image_io.hpp"
#include "cmfd/parallel.hpp"
#include "cmfd/report.hpp"
#include "cmfd/rescale_detector.hpp"
#include "json.hpp"

namespace {

using namespace cmfd;

// Exit codes: 0 clean run (whatever the verdict), 2 bad flags, 3 I/O or
// format trouble, 4 violated preconditions or undefined metrics.
int fail(int code, const std::string& msg) {
  std::fprintf(stderr, "cmfd: %s\n", msg.c_str());
  return code;
}

bool parse_int_list(const std::string& text, std::vector<int>* out) {
  out->clear();
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string token = text.substr(pos, comma - pos);
    if (token.empty()) return false;
    try {
      std::size_t used = 0;
      const int v = std::stoi(token, &used);
      if (used != token.size()) return false;
      out->push_back(v);
    } catch (const std::exception&) {
      return false;
    }
    pos = comma + 1;
    if (comma == text.size()) break;
  }
  return !out->empty();
}

// Accepts "50,170,300" or the sweep shorthand "lo:step:hi" (inclusive).
bool parse_factor_list(const std::string& text, std::vector<int>* out) {
  if (text.find(':') == std::string::npos) return parse_int_list(text, out);
  std::vector<int> parts;
  std::string ranged = text;
  std::replace(ranged.begin(), ranged.end(), ':', ',');
  if (!parse_int_list(ranged, &parts) || parts.size() != 3) return false;
  const int lo = parts[0], step = parts[1], hi = parts[2];
  if (step < 1 || lo > hi) return false;
  out->clear();
  for (int f = lo; f <= hi; f += step) out->push_back(f);
  return true;
}

struct DetectFlags {
  std::string method;
  std::string input;
  int block_size = 0;  // 0 = per-method default
  double threshold = 16.0;
  double hu_tol = 0.1;
  std::string factors;
  int min_offset = -1;
  bool no_zero_offset = false;
  std::string out;
  std::string report;
  int jobs = 0;
};

int run_detect(const DetectFlags& flags) {
  const GrayImage img = load_image(flags.input);
  DetectionReport rep;
  if (flags.method == "exact") {
    ExactConfig config;
    config.block_size = flags.block_size > 0 ? flags.block_size : 4;
    config.min_offset = flags.min_offset;
    config.include_zero_offset = !flags.no_zero_offset;
    config.jobs = flags.jobs;
    rep = detect_intensity_exact(img, config);
  } else if (flags.method == "dct") {
    DctConfig config;
    config.block_size = flags.block_size > 0 ? flags.block_size : 8;
    config.threshold = flags.threshold;
    config.jobs = flags.jobs;
    rep = detect_intensity_dct(img, config);
  } else {
    RescaleConfig config;
    config.block_size = flags.block_size > 0 ? flags.block_size : 20;
    config.hu_tol = flags.hu_tol;
    config.jobs = flags.jobs;
    if (!flags.factors.empty() &&
        !parse_factor_list(flags.factors, &config.factors))
      return fail(2, "bad --factors value '" + flags.factors + "'");
    rep = detect_rescale(img, config);
  }

  if (!flags.out.empty()) {
    rep.mask_path = flags.out;
    save_mask(detection_mask(rep, img.width, img.height), flags.out);
  }
  if (!flags.report.empty()) {
    std::ofstream out(flags.report, std::ios::binary);
    if (!out.good())
      throw io_error("cannot write report '" + flags.report + "'");
    out << to_json(rep).dump(2) << '\n';
  }
  std::printf("%s: %s (%zu matches) in %lld ms\n", method_name(rep.method),
              rep.forgery_detected() ? "forgery_detected" : "not_detected",
              rep.matches.size(), static_cast<long long>(rep.elapsed_ms));
  return 0;
}

struct SynthFlags {
  std::string kind;
  std::uint64_t seed = 1;
  int count = 105;
  std::string sizes = "10,20,30,40";
  std::string out_dir;
  int canvas = 256;
  int jobs = 0;
};

int run_synth(const SynthFlags& flags) {
  CorpusConfig config;
  config.kind = kind_from_name(flags.kind);
  config.seed = flags.seed;
  config.count = flags.count;
  config.out_dir = flags.out_dir;
  config.canvas = flags.canvas;
  config.jobs = flags.jobs;
  if (!parse_int_list(flags.sizes, &config.sizes))
    return fail(2, "bad --sizes value '" + flags.sizes + "'");
  for (int s : config.sizes)
    if (s < 1 || s > 90)
      return fail(2, "size bucket " + std::to_string(s) +
                         "% outside 1..90");
  const std::vector<CorpusEntry> entries = generate_corpus(config);
  std::printf("wrote %zu image/mask pairs and manifest.json to %s\n",
              entries.size(), config.out_dir.c_str());
  return 0;
}

struct EvalFlags {
  std::string pred_dir;
  std::string truth_dir;
  std::string csv;
  std::string json_out;
  std::string method = "unknown";
};

int run_eval(const EvalFlags& flags) {
  namespace fs = std::filesystem;
  const fs::path truth_dir(flags.truth_dir);
  const fs::path manifest_path = truth_dir / "manifest.json";
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in.good())
    throw io_error("cannot read '" + manifest_path.string() + "'");
  const nlohmann::json manifest = nlohmann::json::parse(in);

  std::vector<std::string> missing;
  for (const auto& row : manifest) {
    const fs::path pred =
        fs::path(flags.pred_dir) / row.at("mask").get<std::string>();
    if (!fs::exists(pred)) missing.push_back(pred.string());
  }
  if (!missing.empty()) {
    for (const std::string& path : missing)
      std::fprintf(stderr, "cmfd: missing prediction mask %s\n",
                   path.c_str());
    return fail(4, std::to_string(missing.size()) +
                       " prediction mask(s) missing");
  }

  std::vector<ImageScore> rows;
  std::vector<int> buckets;
  for (const auto& row : manifest) {
    const std::string mask_file = row.at("mask").get<std::string>();
    const std::string image_file = row.at("image").get<std::string>();
    const BinaryMask truth = load_mask((truth_dir / mask_file).string());
    if (truth.count() == 0) {
      std::fprintf(stderr,
                   "cmfd: %s marks no pixels (clean image?); skipped\n",
                   mask_file.c_str());
      continue;
    }
    const BinaryMask pred =
        load_mask((fs::path(flags.pred_dir) / mask_file).string());
    ImageScore entry;
    entry.image_id = fs::path(image_file).stem().string();
    entry.method = flags.method;
    entry.size_bucket_pct = row.at("size_bucket_pct").get<int>();
    entry.score = score(pred, truth);
    buckets.push_back(entry.size_bucket_pct);
    rows.push_back(std::move(entry));
  }
  if (rows.empty()) return fail(4, "no scorable image/mask pairs");

  std::sort(buckets.begin(), buckets.end());
  buckets.erase(std::unique(buckets.begin(), buckets.end()), buckets.end());
  const Aggregate agg = aggregate(rows, buckets);

  std::printf("%-20s %-8s %-12s %s\n", "image_id", "bucket%", "P_pct",
              "fp_pixels");
  for (const ImageScore& row : rows)
    std::printf("%-20s %-8d %-12s %lld\n", row.image_id.c_str(),
                row.size_bucket_pct, format_double(row.score.P).c_str(),
                static_cast<long long>(row.score.false_positive_pixels));
  for (const auto& [bucket, mean] : agg.bucket_mean_p)
    std::printf("bucket %d%%: mean P = %s over %d image(s)\n", bucket,
                format_double(mean).c_str(), agg.bucket_counts.at(bucket));
  std::printf("grand mean P = %s over %d image(s)\n",
              format_double(agg.grand_mean_p).c_str(), agg.total);
  for (const std::string& w : agg.warnings)
    std::fprintf(stderr, "cmfd: %s\n", w.c_str());

  if (!flags.csv.empty()) {
    std::ofstream out(flags.csv, std::ios::binary);
    if (!out.good()) throw io_error("cannot write '" + flags.csv + "'");
    out << scores_to_csv(rows);
  }
  if (!flags.json_out.empty()) {
    std::ofstream out(flags.json_out, std::ios::binary);
    if (!out.good()) throw io_error("cannot write '" + flags.json_out + "'");
    out << scores_to_json(rows, agg).dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"copy-move forgery detection toolkit"};
  app.require_subcommand(1);

  DetectFlags detect_flags;
  CLI::App* detect = app.add_subcommand(
      "detect", "run a detector on one image and report matches");
  detect->add_option("--method", detect_flags.method, "detector to run")
      ->required()
      ->check(CLI::IsMember({"rescale", "exact", "dct"}));
  detect->add_option("--input", detect_flags.input, "image to analyze")
      ->required();
  detect->add_option("--block-size", detect_flags.block_size,
                     "block size (default: 4 exact, 8 dct, 20 rescale)");
  detect->add_option("--threshold", detect_flags.threshold,
                     "dct: min pixel distance between matched blocks");
  detect->add_option("--hu-tol", detect_flags.hu_tol,
                     "rescale: log-invariant match tolerance");
  detect->add_option("--factors", detect_flags.factors,
                     "rescale: factors, e.g. 50,170 or 10:10:500");
  detect->add_option("--min-offset", detect_flags.min_offset,
                     "exact: min Chebyshev offset (-1 = 2*block)");
  detect->add_flag("--no-zero-offset", detect_flags.no_zero_offset,
                   "exact: drop plain (offset 0) clone matches");
  detect->add_option("--out", detect_flags.out, "write detection mask PNG");
  detect->add_option("--report", detect_flags.report,
                     "write JSON report");
  detect->add_option("--jobs", detect_flags.jobs,
                     "worker threads (0 = CMFD_JOBS or 1)");

  SynthFlags synth_flags;
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a seeded forgery corpus with ground truth");
  synth->add_option("--kind", synth_flags.kind, "forgery kind")
      ->required()
      ->check(CLI::IsMember({"copy_move", "copy_rescale_move",
                             "intensity_varied", "multi_clone", "clean"}));
  synth->add_option("--seed", synth_flags.seed, "corpus seed");
  synth->add_option("--count", synth_flags.count, "number of images");
  synth->add_option("--sizes", synth_flags.sizes,
                    "size buckets, percent of canvas area");
  synth->add_option("--out-dir", synth_flags.out_dir, "output directory")
      ->required();
  synth->add_option("--canvas", synth_flags.canvas, "canvas side, pixels");
  synth->add_option("--jobs", synth_flags.jobs,
                    "worker threads (0 = CMFD_JOBS or 1)");

  EvalFlags eval_flags;
  CLI::App* eval = app.add_subcommand(
      "eval", "score predicted masks against a corpus ground truth");
  eval->add_option("--pred-dir", eval_flags.pred_dir,
                   "directory with predicted masks")
      ->required();
  eval->add_option("--truth-dir", eval_flags.truth_dir,
                   "corpus directory with masks and manifest.json")
      ->required();
  eval->add_option("--csv", eval_flags.csv, "write per-image CSV");
  eval->add_option("--json", eval_flags.json_out, "write JSON mirror");
  eval->add_option("--method", eval_flags.method,
                   "method label for the report rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (detect->parsed()) return run_detect(detect_flags);
    if (synth->parsed()) return run_synth(synth_flags);
    return run_eval(eval_flags);
  } catch (const io_error& e) {
    return fail(3, e.what());
  } catch (const format_error& e) {
    return fail(3, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(3, e.what());
  } catch (const cmfd::error& e) {
    return fail(4, e.what());
  } catch (const std::exception& e) {
    return fail(4, e.what());
  }
}
