#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgeseg/rng.hpp"
#include "edgeseg/types.hpp"

namespace edgeseg {

// A 3x3 convolution's parameters with gradient slots. The edge head is the
// two-output instance (make_edge_head); the toy segmentation net reuses the
// same struct with other channel counts.
struct Conv3x3 {
  int in_channels = 0;
  int out_channels = 0;
  std::vector<float> weights;  // [out][in][3][3]
  std::vector<float> bias;     // [out]
  std::vector<float> grad_weights;
  std::vector<float> grad_bias;

  Conv3x3() = default;
  Conv3x3(int in_ch, int out_ch);

  std::size_t weight_index(int o, int c, int ky, int kx) const {
    return ((static_cast<std::size_t>(o) * in_channels + c) * 3 + ky) * 3 + kx;
  }
  float weight(int o, int c, int ky, int kx) const {
    return weights[weight_index(o, c, ky, kx)];
  }
  std::size_t param_count() const { return weights.size() + bias.size(); }

  // He-style uniform init, bias zero. Draw order is fixed, so parameters are
  // reproducible from the rng state.
  void init_random(Pcg32& rng);

  void zero_grads();
};

// Edge head per the architecture: two 3x3 kernels over the segmentation
// scores. Channel 0 scores non-edge, channel 1 scores edge.
Conv3x3 make_edge_head(int in_channels);

// Cross-correlation, stride 1, zero padding 1: output spatial size equals
// input. Throws channel_mismatch.
Tensor3 conv3x3_forward(const Tensor3& input, const Conv3x3& params);

struct ConvGrads {
  std::vector<float> weights;
  std::vector<float> bias;
  Tensor3 input;
};

// Exact adjoints of conv3x3_forward. Pure; does not touch params' slots.
ConvGrads conv3x3_backward(const Tensor3& input, const Conv3x3& params,
                           const Tensor3& grad_output);

struct Xent2dResult {
  double loss = 0.0;
  Tensor3 grad_logits;
  std::int64_t valid_pixels = 0;
};

// Two-channel softmax cross-entropy against a binary edge target, averaged
// over valid pixels. Gradients are zero on invalid pixels. Throws
// no_valid_pixels rather than returning NaN.
Xent2dResult softmax_xent2d(const Tensor3& logits, const BinaryEdgeMap& target);

struct EdgeLossResult {
  double loss = 0.0;
  Tensor3 grad_input;
  std::int64_t valid_pixel_count = 0;
};

// conv3x3_forward -> softmax_xent2d against edge_target(label). Fills the
// params' gradient slots and returns the gradient w.r.t. seg_output.
EdgeLossResult edge_loss(const Tensor3& seg_output, const LabelMap& label, Conv3x3& params);

// Same composition evaluated entirely in double, never rounding the logits
// to float. Finite-difference checks probe this evaluation; a float-rounded
// forward sits above the quotient's noise floor at eps = 1e-3.
double edge_loss_value(const Tensor3& seg_output, const BinaryEdgeMap& target,
                       const Conv3x3& params);

// p <- p - lr * grad for every parameter, then zero the gradient slots.
void sgd_step(Conv3x3& params, double learning_rate);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_coord = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
};

// Central differences of fn around point, one coordinate at a time, compared
// against analytic_grad: rel = |a - n| / max(1e-8, |a| + |n|). point is
// perturbed in place and restored.
GradCheckReport grad_check(const std::function<double(std::span<const float>)>& fn,
                           std::span<float> point, std::span<const float> analytic_grad,
                           double epsilon);

struct GradCheckCase {
  std::string name;
  double max_rel_error = 0.0;
};

// Edge-loss gradient checks (weights, biases, input) across channel counts
// {1, 3, 19}. Used by the gradcheck CLI command and the acceptance suite.
std::vector<GradCheckCase> run_gradcheck_suite(std::uint64_t seed, int instances_per_channel = 2,
                                               double epsilon = 1e-3);

// {in_channels, weights, bias}; out_channels is implied by the nesting.
nlohmann::json conv_to_json(const Conv3x3& params);
Conv3x3 conv_from_json(const nlohmann::json& j);

}  // namespace edgeseg
