#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "edgeseg/edge_head.hpp"
#include "edgeseg/rng.hpp"
#include "edgeseg/types.hpp"

namespace edgeseg {

// Two-conv stand-in for a segmentation backbone, small enough to train on a
// desk in seconds. Parameter count stays under 2000.
struct TinySegNet {
  static constexpr int kHiddenChannels = 8;

  Conv3x3 conv1;  // 3 -> 8
  Conv3x3 conv2;  // 8 -> num_classes
  int num_classes = 0;

  TinySegNet() = default;
  TinySegNet(int num_classes, Pcg32& rng);

  std::size_t param_count() const { return conv1.param_count() + conv2.param_count(); }

  // conv1 -> relu -> conv2; output spatial size equals input.
  Tensor3 forward(const Tensor3& input) const;
};

struct TrainConfig {
  int num_classes = 4;
  double lambda_edge = 1.0;
  double learning_rate = 0.01;
  int epochs = 100;
  int batch_size = 3;
  int crop = 64;           // synthetic images are generated at this size
  int train_images = 50;
  int holdout_images = 8;
  int boundary_tolerance = 2;  // px, for the boundary-F1 proxy metric
  std::uint64_t seed = 7;
};

void validate(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& config);

struct EpochRecord {
  int epoch = 0;
  double seg_loss = 0.0;       // running average over the epoch's samples
  double edge_loss = 0.0;
  double combined_loss = 0.0;
  double boundary_f1 = 0.0;    // mean over the held-out set, after the epoch
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
};

nlohmann::json to_json(const EpochRecord& record);

using Sample = std::pair<RgbImage, LabelMap>;

// Deterministic-by-seed scenes of axis-aligned rectangles and discs, each
// shape a distinct class with its palette color plus per-pixel noise;
// background is class 0 and every label map contains at least 2 classes.
std::vector<Sample> synth_dataset(int n, int size, int num_classes, std::uint64_t seed);

// Image bytes scaled to [0,1], 3xHxW.
Tensor3 image_to_tensor(const RgbImage& image);

struct SegXentResult {
  double loss = 0.0;
  Tensor3 grad_logits;
  std::int64_t valid_pixels = 0;
};

// Per-pixel softmax cross-entropy over num_classes, ignore-255 masked, mean
// reduction. Throws no_valid_pixels.
SegXentResult pixel_xent_seg(const Tensor3& logits, const LabelMap& label);

struct TrainResult {
  TinySegNet net;
  Conv3x3 edge_head;
  TrainLog log;
  double initial_loss = 0.0;  // full-dataset combined loss before training
  double final_loss = 0.0;    // same, after the last epoch
};

// Mini-batch SGD on L = L_seg + lambda * L_edge, shuffled each epoch.
// lambda = 0 leaves the edge head untouched and reduces to plain
// segmentation training. Single-threaded, bit-reproducible given the config.
TrainResult train(const TrainConfig& config, std::span<const Sample> dataset);

// Argmax class per pixel (ties -> lowest id).
LabelMap predict(const TinySegNet& net, const RgbImage& image);

// Boundary precision/recall matched within Chebyshev distance <= tolerance,
// boundaries taken from edge_target. 1.0 when both maps are boundary-free.
double boundary_f1(const LabelMap& pred, const LabelMap& truth, int tolerance);

// Combined loss evaluated in double end to end; the finite-difference
// counterpart for whole-net gradient checks.
double combined_loss_value(const TinySegNet& net, const Conv3x3& edge_head,
                           const Tensor3& input, const LabelMap& label, double lambda);

// Checks every TinySegNet and edge-head parameter of the combined loss on a
// small synthetic instance (4 classes, 8x8, lambda 1).
GradCheckCase endtoend_gradcheck(std::uint64_t seed, double epsilon = 1e-3);

struct AblationArm {
  double lambda = 0.0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double mean_iou = 0.0;
  double boundary_f1 = 0.0;
  TrainLog log;
  TinySegNet net;  // trained network, not serialized into the report
};

struct AblationReport {
  AblationArm baseline;  // lambda = 0
  AblationArm edge;      // lambda = config.lambda_edge
};

// Trains both arms on identical data/seeds and scores them on the same
// held-out set.
AblationReport ablation(const TrainConfig& config);

nlohmann::json to_json(const AblationArm& arm);
nlohmann::json to_json(const AblationReport& report);

}  // namespace edgeseg
