#include "edgeseg/edge_head.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edgeseg/edge_extract.hpp"

namespace edgeseg {

Conv3x3::Conv3x3(int in_ch, int out_ch) : in_channels(in_ch), out_channels(out_ch) {
  if (in_ch < 1 || out_ch < 1) fail(Errc::invalid_config, "conv needs >= 1 channel each way");
  std::size_t n = static_cast<std::size_t>(out_ch) * in_ch * 9;
  weights.assign(n, 0.0f);
  grad_weights.assign(n, 0.0f);
  bias.assign(out_ch, 0.0f);
  grad_bias.assign(out_ch, 0.0f);
}

void Conv3x3::init_random(Pcg32& rng) {
  double limit = std::sqrt(6.0 / (static_cast<double>(in_channels) * 9.0));
  for (float& w : weights) w = static_cast<float>(rng.uniform_real(-limit, limit));
  std::fill(bias.begin(), bias.end(), 0.0f);
  zero_grads();
}

void Conv3x3::zero_grads() {
  std::fill(grad_weights.begin(), grad_weights.end(), 0.0f);
  std::fill(grad_bias.begin(), grad_bias.end(), 0.0f);
}

Conv3x3 make_edge_head(int in_channels) { return Conv3x3(in_channels, 2); }

namespace {

void check_forward_shapes(const Tensor3& input, const Conv3x3& params) {
  if (input.channels != params.in_channels)
    fail(Errc::channel_mismatch, "input has " + std::to_string(input.channels) +
                                     " channels, conv expects " +
                                     std::to_string(params.in_channels));
  if (input.height < 1 || input.width < 1) fail(Errc::shape_mismatch, "empty spatial extent");
}

// Shift-and-accumulate over the 9 taps; inner loops stay contiguous in x.
// acc must be pre-filled with the bias and have out_channels*H*W entries.
template <typename Acc>
void conv_accumulate(const Tensor3& input, const Conv3x3& params, std::vector<Acc>& acc) {
  const int h = input.height;
  const int w = input.width;
  const std::size_t plane = input.plane();
  for (int o = 0; o < params.out_channels; ++o) {
    Acc* out_plane = acc.data() + static_cast<std::size_t>(o) * plane;
    for (int c = 0; c < params.in_channels; ++c) {
      const float* in_plane = input.data.data() + static_cast<std::size_t>(c) * plane;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          Acc weight = static_cast<Acc>(params.weight(o, c, ky, kx));
          if (weight == Acc(0)) continue;
          int y_lo = std::max(0, 1 - ky), y_hi = std::min(h, h + 1 - ky);
          int x_lo = std::max(0, 1 - kx), x_hi = std::min(w, w + 1 - kx);
          for (int y = y_lo; y < y_hi; ++y) {
            const float* in_row = in_plane + static_cast<std::size_t>(y + ky - 1) * w + (kx - 1);
            Acc* out_row = out_plane + static_cast<std::size_t>(y) * w;
            for (int x = x_lo; x < x_hi; ++x) out_row[x] += weight * static_cast<Acc>(in_row[x]);
          }
        }
      }
    }
  }
}

}  // namespace

Tensor3 conv3x3_forward(const Tensor3& input, const Conv3x3& params) {
  check_forward_shapes(input, params);
  const std::size_t plane = input.plane();
  std::vector<double> acc(static_cast<std::size_t>(params.out_channels) * plane);
  for (int o = 0; o < params.out_channels; ++o)
    std::fill_n(acc.begin() + static_cast<std::size_t>(o) * plane, plane,
                static_cast<double>(params.bias[o]));
  conv_accumulate(input, params, acc);

  Tensor3 out(params.out_channels, input.height, input.width);
  for (std::size_t i = 0; i < acc.size(); ++i) out.data[i] = static_cast<float>(acc[i]);
  return out;
}

ConvGrads conv3x3_backward(const Tensor3& input, const Conv3x3& params,
                           const Tensor3& grad_output) {
  check_forward_shapes(input, params);
  if (grad_output.channels != params.out_channels || grad_output.height != input.height ||
      grad_output.width != input.width)
    fail(Errc::shape_mismatch, "grad_output shape does not match the forward output");

  const int h = input.height;
  const int w = input.width;
  const std::size_t plane = input.plane();

  ConvGrads grads;
  grads.bias.assign(params.out_channels, 0.0f);
  grads.weights.assign(params.weights.size(), 0.0f);
  grads.input = Tensor3(params.in_channels, h, w);

  for (int o = 0; o < params.out_channels; ++o) {
    const float* go = grad_output.data.data() + static_cast<std::size_t>(o) * plane;
    double sum = 0.0;
    for (std::size_t i = 0; i < plane; ++i) sum += go[i];
    grads.bias[o] = static_cast<float>(sum);
  }

  // d loss / d w[o,c,ky,kx] = sum over the positions where the tap was in range.
  for (int o = 0; o < params.out_channels; ++o) {
    const float* go = grad_output.data.data() + static_cast<std::size_t>(o) * plane;
    for (int c = 0; c < params.in_channels; ++c) {
      const float* in_plane = input.data.data() + static_cast<std::size_t>(c) * plane;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          int y_lo = std::max(0, 1 - ky), y_hi = std::min(h, h + 1 - ky);
          int x_lo = std::max(0, 1 - kx), x_hi = std::min(w, w + 1 - kx);
          double sum = 0.0;
          for (int y = y_lo; y < y_hi; ++y) {
            const float* in_row = in_plane + static_cast<std::size_t>(y + ky - 1) * w + (kx - 1);
            const float* go_row = go + static_cast<std::size_t>(y) * w;
            for (int x = x_lo; x < x_hi; ++x)
              sum += static_cast<double>(go_row[x]) * static_cast<double>(in_row[x]);
          }
          grads.weights[params.weight_index(o, c, ky, kx)] = static_cast<float>(sum);
        }
      }
    }
  }

  // Adjoint of the shift: scatter grad_output back through each tap.
  std::vector<double> gin(static_cast<std::size_t>(params.in_channels) * plane, 0.0);
  for (int o = 0; o < params.out_channels; ++o) {
    const float* go = grad_output.data.data() + static_cast<std::size_t>(o) * plane;
    for (int c = 0; c < params.in_channels; ++c) {
      double* gin_plane = gin.data() + static_cast<std::size_t>(c) * plane;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          double weight = params.weight(o, c, ky, kx);
          if (weight == 0.0) continue;
          int y_lo = std::max(0, 1 - ky), y_hi = std::min(h, h + 1 - ky);
          int x_lo = std::max(0, 1 - kx), x_hi = std::min(w, w + 1 - kx);
          for (int y = y_lo; y < y_hi; ++y) {
            double* gin_row = gin_plane + static_cast<std::size_t>(y + ky - 1) * w + (kx - 1);
            const float* go_row = go + static_cast<std::size_t>(y) * w;
            for (int x = x_lo; x < x_hi; ++x) gin_row[x] += weight * static_cast<double>(go_row[x]);
          }
        }
      }
    }
  }
  for (std::size_t i = 0; i < gin.size(); ++i)
    grads.input.data[i] = static_cast<float>(gin[i]);
  return grads;
}

Xent2dResult softmax_xent2d(const Tensor3& logits, const BinaryEdgeMap& target) {
  if (logits.channels != 2)
    fail(Errc::channel_mismatch, "edge logits must have exactly 2 channels");
  if (logits.height != target.height || logits.width != target.width)
    fail(Errc::dimension_mismatch, "logits spatial dims do not match the edge target");

  const std::size_t plane = logits.plane();
  std::int64_t valid = 0;
  for (std::uint8_t v : target.valid) valid += v;
  if (valid == 0) fail(Errc::no_valid_pixels, "edge target has no valid pixels");

  Xent2dResult result;
  result.valid_pixels = valid;
  result.grad_logits = Tensor3(2, logits.height, logits.width);

  const float* l0 = logits.data.data();
  const float* l1 = logits.data.data() + plane;
  float* g0 = result.grad_logits.data.data();
  float* g1 = result.grad_logits.data.data() + plane;
  const double inv_n = 1.0 / static_cast<double>(valid);

  double loss_sum = 0.0;
  for (std::size_t i = 0; i < plane; ++i) {
    if (!target.valid[i]) continue;  // grads stay 0 here
    double a = l0[i], b = l1[i];
    double m = std::max(a, b);
    double e0 = std::exp(a - m), e1 = std::exp(b - m);
    double log_z = std::log(e0 + e1);
    int t = target.edges[i];
    loss_sum += log_z - ((t == 0 ? a : b) - m);
    double p0 = e0 / (e0 + e1);
    double p1 = e1 / (e0 + e1);
    g0[i] = static_cast<float>((p0 - (t == 0 ? 1.0 : 0.0)) * inv_n);
    g1[i] = static_cast<float>((p1 - (t == 1 ? 1.0 : 0.0)) * inv_n);
  }
  result.loss = loss_sum * inv_n;
  return result;
}

EdgeLossResult edge_loss(const Tensor3& seg_output, const LabelMap& label, Conv3x3& params) {
  if (seg_output.height != label.height || seg_output.width != label.width)
    fail(Errc::dimension_mismatch, "seg output spatial dims do not match the label map");
  BinaryEdgeMap target = edge_target(label);
  Tensor3 logits = conv3x3_forward(seg_output, params);
  Xent2dResult xent = softmax_xent2d(logits, target);
  ConvGrads grads = conv3x3_backward(seg_output, params, xent.grad_logits);
  params.grad_weights = std::move(grads.weights);
  params.grad_bias = std::move(grads.bias);
  return {xent.loss, std::move(grads.input), xent.valid_pixels};
}

double edge_loss_value(const Tensor3& seg_output, const BinaryEdgeMap& target,
                       const Conv3x3& params) {
  if (params.out_channels != 2) fail(Errc::channel_mismatch, "edge head must have 2 outputs");
  check_forward_shapes(seg_output, params);
  if (seg_output.height != target.height || seg_output.width != target.width)
    fail(Errc::dimension_mismatch, "seg output spatial dims do not match the edge target");

  const std::size_t plane = seg_output.plane();
  std::vector<double> acc(2 * plane);
  std::fill_n(acc.begin(), plane, static_cast<double>(params.bias[0]));
  std::fill_n(acc.begin() + plane, plane, static_cast<double>(params.bias[1]));
  conv_accumulate(seg_output, params, acc);

  std::int64_t valid = 0;
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < plane; ++i) {
    if (!target.valid[i]) continue;
    ++valid;
    double a = acc[i], b = acc[plane + i];
    double m = std::max(a, b);
    double log_z = std::log(std::exp(a - m) + std::exp(b - m));
    loss_sum += log_z - ((target.edges[i] == 0 ? a : b) - m);
  }
  if (valid == 0) fail(Errc::no_valid_pixels, "edge target has no valid pixels");
  return loss_sum / static_cast<double>(valid);
}

void sgd_step(Conv3x3& params, double learning_rate) {
  for (std::size_t i = 0; i < params.weights.size(); ++i)
    params.weights[i] = static_cast<float>(static_cast<double>(params.weights[i]) -
                                           learning_rate * params.grad_weights[i]);
  for (std::size_t i = 0; i < params.bias.size(); ++i)
    params.bias[i] = static_cast<float>(static_cast<double>(params.bias[i]) -
                                        learning_rate * params.grad_bias[i]);
  params.zero_grads();
}

GradCheckReport grad_check(const std::function<double(std::span<const float>)>& fn,
                           std::span<float> point, std::span<const float> analytic_grad,
                           double epsilon) {
  if (point.size() != analytic_grad.size())
    fail(Errc::shape_mismatch, "analytic gradient size does not match the point");
  if (!(epsilon > 0.0)) fail(Errc::invalid_config, "epsilon must be positive");

  GradCheckReport report;
  for (std::size_t k = 0; k < point.size(); ++k) {
    float orig = point[k];
    float hi = static_cast<float>(orig + epsilon);
    float lo = static_cast<float>(orig - epsilon);
    if (hi == lo) continue;  // value too large for this epsilon to move

    point[k] = hi;
    double f_hi = fn(point);
    point[k] = lo;
    double f_lo = fn(point);
    point[k] = orig;

    double numeric = (f_hi - f_lo) / (static_cast<double>(hi) - static_cast<double>(lo));
    double analytic = analytic_grad[k];
    double rel = std::abs(analytic - numeric) /
                 std::max(1e-8, std::abs(analytic) + std::abs(numeric));
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_coord = k;
      report.analytic_at_worst = analytic;
      report.numeric_at_worst = numeric;
    }
  }
  return report;
}

std::vector<GradCheckCase> run_gradcheck_suite(std::uint64_t seed, int instances_per_channel,
                                               double epsilon) {
  std::vector<GradCheckCase> cases;
  const int channel_options[] = {1, 3, 19};

  for (int channels : channel_options) {
    for (int instance = 0; instance < instances_per_channel; ++instance) {
      Pcg32 rng(derive_seed(seed, static_cast<std::uint64_t>(channels) * 1000 + instance));
      int h = rng.uniform_int(3, 8);
      int w = rng.uniform_int(3, 8);

      // Random labels give dense edges; re-draw in the rare case the sprinkled
      // ignore pixels invalidate the whole target.
      LabelMap label(w, h);
      BinaryEdgeMap target;
      while (true) {
        for (std::uint8_t& v : label.data)
          v = static_cast<std::uint8_t>(rng.uniform_below(kNumClasses));
        if (rng.bernoulli(0.5))
          label.data[rng.uniform_below(static_cast<std::uint32_t>(label.data.size()))] =
              kIgnoreLabel;
        target = edge_target(label);
        std::int64_t valid = 0;
        for (std::uint8_t v : target.valid) valid += v;
        if (valid > 0) break;
      }

      Tensor3 seg(channels, h, w);
      for (float& v : seg.data) v = static_cast<float>(rng.uniform_real(-2.0, 2.0));
      Conv3x3 params = make_edge_head(channels);
      params.init_random(rng);

      EdgeLossResult analytic = edge_loss(seg, label, params);
      std::string prefix = "edge_loss/c" + std::to_string(channels) + "/i" +
                           std::to_string(instance);

      {
        Conv3x3 scratch = params;
        auto fn = [&](std::span<const float>) { return edge_loss_value(seg, target, scratch); };
        GradCheckReport r = grad_check(fn, std::span<float>(scratch.weights),
                                       std::span<const float>(params.grad_weights), epsilon);
        cases.push_back({prefix + "/weights", r.max_rel_error});
        GradCheckReport rb = grad_check(fn, std::span<float>(scratch.bias),
                                        std::span<const float>(params.grad_bias), epsilon);
        cases.push_back({prefix + "/bias", rb.max_rel_error});
      }
      {
        Tensor3 scratch = seg;
        auto fn = [&](std::span<const float>) { return edge_loss_value(scratch, target, params); };
        GradCheckReport r = grad_check(fn, std::span<float>(scratch.data),
                                       std::span<const float>(analytic.grad_input.data), epsilon);
        cases.push_back({prefix + "/input", r.max_rel_error});
      }
    }
  }
  return cases;
}

nlohmann::json conv_to_json(const Conv3x3& params) {
  nlohmann::json weights = nlohmann::json::array();
  for (int o = 0; o < params.out_channels; ++o) {
    nlohmann::json per_out = nlohmann::json::array();
    for (int c = 0; c < params.in_channels; ++c) {
      nlohmann::json kernel = nlohmann::json::array();
      for (int ky = 0; ky < 3; ++ky) {
        nlohmann::json row = nlohmann::json::array();
        for (int kx = 0; kx < 3; ++kx) row.push_back(params.weight(o, c, ky, kx));
        kernel.push_back(std::move(row));
      }
      per_out.push_back(std::move(kernel));
    }
    weights.push_back(std::move(per_out));
  }
  return nlohmann::json{
      {"in_channels", params.in_channels},
      {"weights", std::move(weights)},
      {"bias", params.bias},
  };
}

Conv3x3 conv_from_json(const nlohmann::json& j) {
  int in_channels = j.at("in_channels").get<int>();
  const nlohmann::json& weights = j.at("weights");
  if (!weights.is_array() || weights.empty())
    fail(Errc::invalid_config, "weights must be a non-empty nested array");
  int out_channels = static_cast<int>(weights.size());

  Conv3x3 params(in_channels, out_channels);
  for (int o = 0; o < out_channels; ++o) {
    const nlohmann::json& per_out = weights.at(o);
    if (static_cast<int>(per_out.size()) != in_channels)
      fail(Errc::invalid_config, "weights nesting does not match in_channels");
    for (int c = 0; c < in_channels; ++c) {
      const nlohmann::json& kernel = per_out.at(c);
      if (kernel.size() != 3) fail(Errc::invalid_config, "kernel must be 3x3");
      for (int ky = 0; ky < 3; ++ky) {
        const nlohmann::json& row = kernel.at(ky);
        if (row.size() != 3) fail(Errc::invalid_config, "kernel must be 3x3");
        for (int kx = 0; kx < 3; ++kx)
          params.weights[params.weight_index(o, c, ky, kx)] = row.at(kx).get<float>();
      }
    }
  }
  const nlohmann::json& bias = j.at("bias");
  if (static_cast<int>(bias.size()) != out_channels)
    fail(Errc::invalid_config, "bias length does not match weights nesting");
  for (int o = 0; o < out_channels; ++o) params.bias[o] = bias.at(o).get<float>();
  return params;
}

}  // namespace edgeseg
