#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "edgeseg/error.hpp"

using namespace edgeseg;
using namespace edgeseg::cli;

// Exit codes: 0 success, 1 runtime error, 2 usage error.
int main(int argc, char** argv) {
  CLI::App app{"Edge-preserving semantic segmentation toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int jobs = 0;
  std::string log_level = "info";
  auto* seed_opt = app.add_option("--seed", seed, "Seed for randomized commands");
  app.add_option("--jobs", jobs, "Parallel workers (0 = all cores)");
  app.add_option("--log-level", log_level, "debug|info|warn|error");

  EdgesArgs edges_args;
  auto* edges = app.add_subcommand("edges", "Extract the binary edge map of a label map");
  edges->add_option("label", edges_args.label_path, "Input label map PNG")->required();
  edges->add_option("-o,--out", edges_args.out_path, "Output PNG (0 non-edge, 255 edge, 128 invalid)")
      ->required();
  edges->fallthrough();

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "Class pixel histogram over a label directory");
  stats->add_option("labels", stats_args.labels_dir, "Directory of label map PNGs")->required();
  stats->add_option("--rarity-threshold", stats_args.rarity_threshold,
                    "Flag classes below this frequency");
  stats->fallthrough();

  AugmentArgs augment_args;
  auto* augment = app.add_subcommand("augment", "Rare-class copy-paste augmentation");
  augment->add_option("--images", augment_args.images_dir, "Directory of RGB PNGs")->required();
  augment->add_option("--labels", augment_args.labels_dir, "Directory of label PNGs")->required();
  augment->add_option("--out", augment_args.out_dir, "Output directory")->required();
  augment->add_option("--config", augment_args.config_path, "AugmentConfig JSON");
  augment->fallthrough();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "IoU report for predictions against ground truth");
  eval->add_option("--pred", eval_args.pred_dir, "Directory of predicted label PNGs")->required();
  eval->add_option("--truth", eval_args.truth_dir, "Directory of ground-truth PNGs")->required();
  eval->add_option("--cat-map", eval_args.cat_map_path, "Category mapping JSON (default Cityscapes)");
  eval->fallthrough();

  GradcheckArgs gradcheck_args;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  gradcheck->add_option("--epsilon", gradcheck_args.epsilon, "Central-difference step");
  gradcheck->add_option("--threshold", gradcheck_args.threshold, "Max acceptable relative error");
  gradcheck->fallthrough();

  TrainDemoArgs train_args;
  auto* train_demo = app.add_subcommand("train-demo", "Train the toy net with and without the edge loss");
  train_demo->add_option("--config", train_args.config_path, "TrainConfig JSON");
  train_demo->add_option("--out", train_args.out_dir, "Output directory")->required();
  train_demo->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  }

  try {
    if (const char* env_level = std::getenv("EDGESEG_LOG")) log_level = env_level;
    set_log_level(parse_log_level(log_level));

    if (*edges) return run_edges(edges_args);
    if (*stats) return run_stats(stats_args);
    if (*augment) {
      augment_args.seed = seed;
      augment_args.seed_given = seed_opt->count() > 0;
      augment_args.jobs = jobs;
      return run_augment(augment_args);
    }
    if (*eval) return run_eval(eval_args);
    if (*gradcheck) {
      gradcheck_args.seed = seed;
      return run_gradcheck(gradcheck_args);
    }
    if (*train_demo) {
      train_args.seed = seed;
      train_args.seed_given = seed_opt->count() > 0;
      return run_train_demo(train_args);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
