#pragma once

#include <cstdint>
#include <string>

namespace edgeseg::cli {

// Log levels in increasing severity; messages below the active level are
// dropped. Everything goes to stderr, stdout stays machine-readable.
enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };

void set_log_level(LogLevel level);
LogLevel parse_log_level(const std::string& name);
void log(LogLevel level, const std::string& message);

struct EdgesArgs {
  std::string label_path;
  std::string out_path;
};

struct StatsArgs {
  std::string labels_dir;
  double rarity_threshold = 0.01;
};

struct AugmentArgs {
  std::string images_dir;
  std::string labels_dir;
  std::string out_dir;
  std::string config_path;  // empty = defaults
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 0;  // 0 = hardware concurrency
};

struct EvalArgs {
  std::string pred_dir;
  std::string truth_dir;
  std::string cat_map_path;  // empty = Cityscapes categories
};

struct GradcheckArgs {
  std::uint64_t seed = 0;
  double epsilon = 1e-3;
  double threshold = 1e-3;
};

struct TrainDemoArgs {
  std::string config_path;  // empty = defaults
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

int run_edges(const EdgesArgs& args);
int run_stats(const StatsArgs& args);
int run_augment(const AugmentArgs& args);
int run_eval(const EvalArgs& args);
int run_gradcheck(const GradcheckArgs& args);
int run_train_demo(const TrainDemoArgs& args);

}  // namespace edgeseg::cli
