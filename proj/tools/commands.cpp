#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include <json.hpp>

#include "edgeseg/augment.hpp"
#include "edgeseg/cityscapes.hpp"
#include "edgeseg/edge_extract.hpp"
#include "edgeseg/edge_head.hpp"
#include "edgeseg/metrics.hpp"
#include "edgeseg/png_io.hpp"
#include "edgeseg/toytrain.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace edgeseg::cli {

namespace {

LogLevel g_log_level = LogLevel::info;

const char* level_tag(LogLevel level) {
  switch (level) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warn: return "warn";
    case LogLevel::error: return "error";
  }
  return "?";
}

std::vector<fs::path> sorted_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(Errc::file_not_found, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::file_not_found, path.string());
  json j;
  in >> j;
  return j;
}

// Index-parallel loop; worker count bounded by jobs (0 = all cores). Callers
// must write results into per-index slots; nothing here depends on order.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs)
                              : std::max(1u, std::thread::hardware_concurrency());
  if (n > 0) workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

void set_log_level(LogLevel level) { g_log_level = level; }

LogLevel parse_log_level(const std::string& name) {
  if (name == "debug") return LogLevel::debug;
  if (name == "info") return LogLevel::info;
  if (name == "warn") return LogLevel::warn;
  if (name == "error") return LogLevel::error;
  fail(Errc::invalid_config, "unknown log level: " + name);
}

void log(LogLevel level, const std::string& message) {
  if (level < g_log_level) return;
  std::fprintf(stderr, "[%s] %s\n", level_tag(level), message.c_str());
}

int run_edges(const EdgesArgs& args) {
  LabelMap label = load_label_map(args.label_path);
  BinaryEdgeMap target = edge_target(label);

  Gray8 out{target.width, target.height,
            std::vector<std::uint8_t>(target.pixel_count(), 0)};
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = target.valid[i] ? (target.edges[i] ? 255 : 0) : 128;
  save_gray8(out, args.out_path);
  log(LogLevel::info, "wrote " + args.out_path);
  return 0;
}

int run_stats(const StatsArgs& args) {
  std::vector<fs::path> files = sorted_pngs(args.labels_dir);
  if (files.empty()) fail(Errc::file_not_found, "no label maps in " + args.labels_dir);

  ClassHistogram hist;
  for (const fs::path& file : files) accumulate(hist, load_label_map(file));

  auto freq = hist.frequencies();
  json rare = json::array();
  for (int c = 0; c < kNumClasses; ++c)
    if (freq[c] < args.rarity_threshold) rare.push_back(c);

  json out{
      {"images", files.size()},
      {"counts", hist.counts},
      {"ignore_count", hist.ignore_count},
      {"frequencies", freq},
      {"rarity_threshold", args.rarity_threshold},
      {"rare_classes", std::move(rare)},
  };
  std::printf("%s\n", out.dump().c_str());
  return 0;
}

int run_augment(const AugmentArgs& args) {
  AugmentConfig config;
  if (!args.config_path.empty())
    config = augment_config_from_json(load_json_file(args.config_path));
  if (args.seed_given) config.seed = args.seed;

  std::vector<fs::path> label_files = sorted_pngs(args.labels_dir);
  if (label_files.empty()) fail(Errc::file_not_found, "no label maps in " + args.labels_dir);
  std::vector<fs::path> image_files;
  for (const fs::path& label_file : label_files) {
    fs::path image_file = fs::path(args.images_dir) / label_file.filename();
    if (!fs::exists(image_file))
      fail(Errc::file_not_found, "no image for label " + label_file.filename().string());
    image_files.push_back(image_file);
  }

  // Corpus-wide donor pool, assembled in deterministic file/class/component order.
  std::vector<InstancePatch> donors;
  for (std::size_t i = 0; i < label_files.size(); ++i) {
    LabelMap label = load_label_map(label_files[i]);
    RgbImage image = load_rgb_image(image_files[i]);
    for (std::uint8_t cls : config.rare_classes) {
      auto patches = extract_instances(label, image, cls, config.min_instance_pixels);
      donors.insert(donors.end(), std::make_move_iterator(patches.begin()),
                    std::make_move_iterator(patches.end()));
    }
  }
  log(LogLevel::info, "donor pool: " + std::to_string(donors.size()) + " instances");
  if (donors.empty() && config.pastes_per_image > 0)
    log(LogLevel::warn, "donor pool is empty; images pass through unchanged");

  fs::create_directories(fs::path(args.out_dir) / "images");
  fs::create_directories(fs::path(args.out_dir) / "labels");

  std::vector<AugmentLog> logs(label_files.size());
  parallel_for(label_files.size(), args.jobs, [&](std::size_t i) {
    LabelMap label = load_label_map(label_files[i]);
    RgbImage image = load_rgb_image(image_files[i]);
    Pcg32 rng(derive_seed(config.seed, i));
    AugmentResult result = augment_sample(image, label, donors, config, rng);
    save_rgb_image(result.image, fs::path(args.out_dir) / "images" / image_files[i].filename());
    save_label_map(result.label, fs::path(args.out_dir) / "labels" / label_files[i].filename());
    logs[i] = std::move(result.log);
  });

  std::ofstream log_out(fs::path(args.out_dir) / "augment_log.jsonl");
  if (!log_out) fail(Errc::io_error, "cannot write augment log");
  for (std::size_t i = 0; i < logs.size(); ++i) {
    for (const PasteRecord& record : logs[i].pastes) {
      json line = to_json(record);
      line["image"] = label_files[i].filename().string();
      log_out << line.dump() << "\n";
    }
  }
  log(LogLevel::info, "augmented " + std::to_string(label_files.size()) + " images");
  return 0;
}

int run_eval(const EvalArgs& args) {
  CategoryMap cat_map = args.cat_map_path.empty()
                            ? cityscapes_category_map()
                            : category_map_from_json(load_json_file(args.cat_map_path));

  std::vector<fs::path> truth_files = sorted_pngs(args.truth_dir);
  if (truth_files.empty()) fail(Errc::file_not_found, "no label maps in " + args.truth_dir);

  ConfusionMatrix cm;
  for (const fs::path& truth_file : truth_files) {
    fs::path pred_file = fs::path(args.pred_dir) / truth_file.filename();
    if (!fs::exists(pred_file))
      fail(Errc::file_not_found, "no prediction for " + truth_file.filename().string());
    accumulate(cm, load_label_map(pred_file), load_label_map(truth_file));
  }

  json out = report(cm, cat_map);
  out["images"] = truth_files.size();
  std::printf("%s\n", out.dump().c_str());
  return 0;
}

int run_gradcheck(const GradcheckArgs& args) {
  std::vector<GradCheckCase> cases = run_gradcheck_suite(args.seed, 2, args.epsilon);
  cases.push_back(endtoend_gradcheck(args.seed, args.epsilon));

  double max_err = 0.0;
  json case_list = json::array();
  for (const GradCheckCase& c : cases) {
    max_err = std::max(max_err, c.max_rel_error);
    case_list.push_back({{"name", c.name}, {"max_rel_error", c.max_rel_error}});
  }
  json out{
      {"max_rel_error", max_err},
      {"threshold", args.threshold},
      {"epsilon", args.epsilon},
      {"cases", std::move(case_list)},
  };
  std::printf("%s\n", out.dump().c_str());
  if (max_err >= args.threshold) {
    log(LogLevel::error, "gradient check failed: " + std::to_string(max_err));
    return 1;
  }
  return 0;
}

int run_train_demo(const TrainDemoArgs& args) {
  TrainConfig config;
  if (!args.config_path.empty())
    config = train_config_from_json(load_json_file(args.config_path));
  if (args.seed_given) config.seed = args.seed;

  fs::create_directories(args.out_dir);
  log(LogLevel::info,
      "training both arms (lambda 0 and " + std::to_string(config.lambda_edge) + ")");
  AblationReport result = ablation(config);

  auto write_log = [&](const fs::path& path, const TrainLog& train_log) {
    std::ofstream out(path);
    if (!out) fail(Errc::io_error, "cannot write " + path.string());
    for (const EpochRecord& record : train_log.epochs) out << to_json(record).dump() << "\n";
  };
  write_log(fs::path(args.out_dir) / "train_log.jsonl", result.edge.log);
  write_log(fs::path(args.out_dir) / "train_log_baseline.jsonl", result.baseline.log);

  {
    std::ofstream out(fs::path(args.out_dir) / "ablation_report.json");
    out << to_json(result).dump(2) << "\n";
  }
  {
    std::ofstream out(fs::path(args.out_dir) / "config.json");
    out << to_json(config).dump(2) << "\n";
  }

  std::vector<Sample> holdout = synth_dataset(config.holdout_images, config.crop,
                                              config.num_classes, derive_seed(config.seed, 3));
  for (std::size_t i = 0; i < holdout.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "pred_%03zu.png", i);
    save_label_map(predict(result.edge.net, holdout[i].first),
                   fs::path(args.out_dir) / name);
  }

  std::printf("%s\n", to_json(result).dump().c_str());
  return 0;
}

}  // namespace edgeseg::cli
