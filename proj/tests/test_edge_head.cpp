#include <doctest.h>

#include <cmath>

#include "edgeseg/edge_extract.hpp"
#include "edgeseg/edge_head.hpp"
#include "edgeseg/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace edgeseg;

TEST_SUITE("edge_head") {

TEST_CASE("conv: zero weights leave only the bias") {
  Pcg32 rng(301);
  Tensor3 input = testutil::random_tensor(rng, 3, 4, 5);
  Conv3x3 params(3, 2);
  params.bias = {0.3f, -0.2f};

  Tensor3 out = conv3x3_forward(input, params);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) {
      CHECK(out.at(0, y, x) == 0.3f);
      CHECK(out.at(1, y, x) == -0.2f);
    }
}

TEST_CASE("conv: center-tap identity kernel copies a channel") {
  Pcg32 rng(302);
  Tensor3 input = testutil::random_tensor(rng, 2, 6, 6);
  Conv3x3 params(2, 2);
  params.weights[params.weight_index(0, 0, 1, 1)] = 1.0f;

  Tensor3 out = conv3x3_forward(input, params);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) {
      CHECK(out.at(0, y, x) == input.at(0, y, x));
      CHECK(out.at(1, y, x) == 0.0f);
    }
}

TEST_CASE("conv matches the naive oracle on random instances") {
  Pcg32 rng(303);
  for (int trial = 0; trial < 30; ++trial) {
    int c = rng.uniform_int(1, 5), h = rng.uniform_int(1, 8), w = rng.uniform_int(1, 8);
    int o = rng.uniform_int(1, 4);
    Tensor3 input = testutil::random_tensor(rng, c, h, w);
    Conv3x3 params(c, o);
    params.init_random(rng);
    for (float& b : params.bias) b = static_cast<float>(rng.uniform_real(-1, 1));

    Tensor3 got = conv3x3_forward(input, params);
    Tensor3 expected = oracle::conv3x3(input, params);
    for (std::size_t i = 0; i < got.data.size(); ++i) {
      double rel = std::abs(got.data[i] - expected.data[i]) /
                   std::max(1e-6, std::abs(static_cast<double>(expected.data[i])));
      REQUIRE(rel < 1e-5);
    }
  }
}

TEST_CASE("conv: channel mismatch is rejected") {
  Conv3x3 params(3, 2);
  CHECK_THROWS_AS(conv3x3_forward(Tensor3(4, 2, 2), params), Error);
}

TEST_CASE("conv: translation equivariance away from borders") {
  Pcg32 rng(304);
  Tensor3 input = testutil::random_tensor(rng, 2, 8, 8);
  Conv3x3 params(2, 2);
  params.init_random(rng);

  Tensor3 shifted(2, 8, 8);
  for (int c = 0; c < 2; ++c)
    for (int y = 0; y < 8; ++y)
      for (int x = 1; x < 8; ++x) shifted.at(c, y, x) = input.at(c, y, x - 1);

  Tensor3 out = conv3x3_forward(input, params);
  Tensor3 out_shifted = conv3x3_forward(shifted, params);
  for (int c = 0; c < 2; ++c)
    for (int y = 1; y < 7; ++y)
      for (int x = 2; x < 7; ++x)
        CHECK(out_shifted.at(c, y, x) == doctest::Approx(out.at(c, y, x - 1)).epsilon(1e-6));
}

TEST_CASE("xent2d: saturated correct logits give near-zero loss") {
  Tensor3 logits(2, 1, 1);
  logits.at(0, 0, 0) = 10.0f;
  logits.at(1, 0, 0) = -10.0f;
  BinaryEdgeMap target(1, 1);  // edges 0, valid 1

  Xent2dResult result = softmax_xent2d(logits, target);
  CHECK(result.loss == doctest::Approx(2.06e-9).epsilon(0.05));
  CHECK(std::abs(result.grad_logits.at(0, 0, 0)) < 1e-8);
}

TEST_CASE("xent2d: uniform logits give ln 2 regardless of targets") {
  Pcg32 rng(305);
  Tensor3 logits(2, 4, 4);
  BinaryEdgeMap target(4, 4);
  for (auto& e : target.edges) e = rng.bernoulli(0.5) ? 1 : 0;

  Xent2dResult result = softmax_xent2d(logits, target);
  CHECK(result.loss == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(result.valid_pixels == 16);
}

TEST_CASE("xent2d: loss and gradient match the extended-precision oracle") {
  Pcg32 rng(306);
  for (int trial = 0; trial < 30; ++trial) {
    int h = rng.uniform_int(1, 6), w = rng.uniform_int(1, 6);
    Tensor3 logits = testutil::random_tensor(rng, 2, h, w, -4.0, 4.0);
    BinaryEdgeMap target(w, h);
    bool any_valid = false;
    for (std::size_t i = 0; i < target.edges.size(); ++i) {
      target.valid[i] = rng.bernoulli(0.8) ? 1 : 0;
      target.edges[i] = target.valid[i] && rng.bernoulli(0.5) ? 1 : 0;
      any_valid |= target.valid[i] == 1;
    }
    if (!any_valid) target.valid[0] = 1;

    Xent2dResult result = softmax_xent2d(logits, target);
    double expected = oracle::xent2d(logits, target);
    CHECK(result.loss == doctest::Approx(expected).epsilon(1e-5));

    // Per valid pixel the implied softmax sums to 1; invalid pixels carry no
    // gradient.
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        std::size_t i = static_cast<std::size_t>(y) * w + x;
        double g0 = result.grad_logits.at(0, y, x);
        double g1 = result.grad_logits.at(1, y, x);
        if (!target.valid[i]) {
          CHECK(g0 == 0.0);
          CHECK(g1 == 0.0);
        } else {
          double onehot_sum = 1.0;  // sum over k of 1{k==t}
          double p_sum = (g0 + g1) * result.valid_pixels + onehot_sum;
          CHECK(p_sum == doctest::Approx(1.0).epsilon(1e-6));
        }
      }
  }
}

TEST_CASE("xent2d: no valid pixels is an error, not NaN") {
  Tensor3 logits(2, 2, 2);
  BinaryEdgeMap target(2, 2);
  std::fill(target.valid.begin(), target.valid.end(), 0);
  try {
    softmax_xent2d(logits, target);
    FAIL("expected NoValidPixels");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_valid_pixels);
  }
}

TEST_CASE("backward: zero grad_output gives zero gradients") {
  Pcg32 rng(307);
  Tensor3 input = testutil::random_tensor(rng, 3, 4, 4);
  Conv3x3 params(3, 2);
  params.init_random(rng);
  ConvGrads grads = conv3x3_backward(input, params, Tensor3(2, 4, 4));
  for (float v : grads.weights) CHECK(v == 0.0f);
  for (float v : grads.bias) CHECK(v == 0.0f);
  for (float v : grads.input.data) CHECK(v == 0.0f);
}

TEST_CASE("backward: 1x1 spatial case by hand") {
  Pcg32 rng(308);
  Tensor3 input = testutil::random_tensor(rng, 3, 1, 1);
  Conv3x3 params(3, 2);
  params.init_random(rng);
  Tensor3 grad_out = testutil::random_tensor(rng, 2, 1, 1);

  ConvGrads grads = conv3x3_backward(input, params, grad_out);
  for (int o = 0; o < 2; ++o) {
    CHECK(grads.bias[o] == grad_out.at(o, 0, 0));
    for (int c = 0; c < 3; ++c)
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          float expected = (ky == 1 && kx == 1)
                               ? grad_out.at(o, 0, 0) * input.at(c, 0, 0)
                               : 0.0f;
          CHECK(grads.weights[params.weight_index(o, c, ky, kx)] ==
                doctest::Approx(expected).epsilon(1e-6));
        }
  }
}

TEST_CASE("grad_check: exact on a linear map") {
  std::vector<float> point = {0.5f, -1.25f, 2.0f};
  std::vector<float> coeff = {3.0f, -0.5f, 1.5f};
  auto fn = [&](std::span<const float> p) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += static_cast<double>(coeff[i]) * p[i];
    return sum;
  };
  GradCheckReport report = grad_check(fn, point, coeff, 1e-3);
  CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("edge_loss: all-ignore label is NoValidPixels") {
  Conv3x3 params = make_edge_head(3);
  Tensor3 seg(3, 4, 4);
  CHECK_THROWS_AS(edge_loss(seg, LabelMap(4, 4, kIgnoreLabel), params), Error);
}

TEST_CASE("edge_loss: zero head gives ln 2") {
  Pcg32 rng(309);
  Conv3x3 params = make_edge_head(3);
  Tensor3 seg = testutil::random_tensor(rng, 3, 6, 6);
  LabelMap label(6, 6, 0);
  for (int y = 0; y < 6; ++y)
    for (int x = 3; x < 6; ++x) label.at(x, y) = 5;

  EdgeLossResult result = edge_loss(seg, label, params);
  CHECK(result.loss == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(result.valid_pixel_count == 36);
}

TEST_CASE("edge_loss equals the manual composition") {
  Pcg32 rng(310);
  LabelMap label(8, 8, 0);
  for (int y = 3; y < 8; ++y)
    for (int x = 0; x < 4; ++x) label.at(x, y) = 11;
  Tensor3 seg = testutil::random_tensor(rng, 19, 8, 8);
  Conv3x3 params = make_edge_head(19);
  params.init_random(rng);

  Conv3x3 params_copy = params;
  EdgeLossResult fused = edge_loss(seg, label, params);

  BinaryEdgeMap target = edge_target(label);
  Tensor3 logits = conv3x3_forward(seg, params_copy);
  Xent2dResult xent = softmax_xent2d(logits, target);
  CHECK(fused.loss == doctest::Approx(xent.loss).epsilon(1e-12));

  double oracle_loss = oracle::xent2d(oracle::conv3x3(seg, params_copy), target);
  CHECK(fused.loss == doctest::Approx(oracle_loss).epsilon(1e-5));

  ConvGrads grads = conv3x3_backward(seg, params_copy, xent.grad_logits);
  CHECK(params.grad_weights == grads.weights);
  CHECK(params.grad_bias == grads.bias);
  CHECK(fused.grad_input.data == grads.input.data);
}

TEST_CASE("gradient suite stays under 1e-3") {
  for (const GradCheckCase& c : run_gradcheck_suite(7, 1)) {
    INFO(c.name);
    CHECK(c.max_rel_error < 1e-3);
  }
}

TEST_CASE("invalid-pixel isolation: ignored regions carry no influence") {
  Pcg32 rng(311);
  LabelMap label(9, 9, 4);
  for (int y = 2; y < 7; ++y)
    for (int x = 2; x < 7; ++x) label.at(x, y) = kIgnoreLabel;  // 5x5 ignore block

  Tensor3 seg = testutil::random_tensor(rng, 3, 9, 9);
  Conv3x3 params = make_edge_head(3);
  params.init_random(rng);
  Conv3x3 params_b = params;

  EdgeLossResult base = edge_loss(seg, label, params);

  // (4,4) has its full 3x3 logit neighborhood inside the invalid block.
  Tensor3 poked = seg;
  for (int c = 0; c < 3; ++c) poked.at(c, 4, 4) += 37.0f;
  EdgeLossResult poked_result = edge_loss(poked, label, params_b);

  CHECK(poked_result.loss == base.loss);
  CHECK(params_b.grad_weights == params.grad_weights);
  CHECK(params_b.grad_bias == params.grad_bias);
  CHECK(base.grad_input.at(0, 4, 4) == 0.0f);
}

TEST_CASE("sgd_step: lr 0 keeps parameters, grads are cleared") {
  Pcg32 rng(312);
  Conv3x3 params = make_edge_head(2);
  params.init_random(rng);
  for (float& g : params.grad_weights) g = 1.0f;
  std::vector<float> before = params.weights;
  sgd_step(params, 0.0);
  CHECK(params.weights == before);
  for (float g : params.grad_weights) CHECK(g == 0.0f);
}

TEST_CASE("sgd_step: single-parameter arithmetic") {
  Conv3x3 params(1, 1);
  params.weights[0] = 1.0f;
  params.grad_weights[0] = 2.0f;
  sgd_step(params, 0.1);
  CHECK(params.weights[0] == doctest::Approx(0.8f));
}

TEST_CASE("200 SGD steps halve the edge loss") {
  Pcg32 rng(313);
  LabelMap label(8, 8, 0);
  for (int y = 0; y < 8; ++y)
    for (int x = 4; x < 8; ++x) label.at(x, y) = 13;
  Tensor3 seg = testutil::random_tensor(rng, 19, 8, 8);
  Conv3x3 params = make_edge_head(19);
  params.init_random(rng);

  double initial = edge_loss(seg, label, params).loss;
  double last = initial;
  for (int step = 0; step < 200; ++step) {
    last = edge_loss(seg, label, params).loss;
    sgd_step(params, 0.01);
  }
  CHECK(last < initial);
  CHECK(last < 0.5 * initial);
}

TEST_CASE("params json round-trip reproduces the loss") {
  Pcg32 rng(314);
  Tensor3 seg = testutil::random_tensor(rng, 5, 6, 6);
  LabelMap label(6, 6, 0);
  for (int x = 0; x < 6; ++x) label.at(x, 0) = 2;
  Conv3x3 params = make_edge_head(5);
  params.init_random(rng);
  for (float& b : params.bias) b = static_cast<float>(rng.uniform_real(-0.5, 0.5));

  Conv3x3 reloaded = conv_from_json(conv_to_json(params));
  CHECK(reloaded.in_channels == 5);
  CHECK(reloaded.out_channels == 2);

  Conv3x3 a = params, b = reloaded;
  double loss_a = edge_loss(seg, label, a).loss;
  double loss_b = edge_loss(seg, label, b).loss;
  CHECK(loss_a == doctest::Approx(loss_b).epsilon(1e-6));
}

TEST_CASE("all tensors produced by the head are finite") {
  Pcg32 rng(315);
  Tensor3 seg = testutil::random_tensor(rng, 3, 7, 7, -50.0, 50.0);
  LabelMap label = testutil::random_label_map(rng, 7, 0.0);
  label = LabelMap(7, 7, 0);
  label.at(3, 3) = 8;
  Conv3x3 params = make_edge_head(3);
  params.init_random(rng);

  EdgeLossResult result = edge_loss(seg, label, params);
  CHECK(std::isfinite(result.loss));
  CHECK(all_finite(result.grad_input));
  CHECK(all_finite(conv3x3_forward(seg, params)));
}

}  // TEST_SUITE
