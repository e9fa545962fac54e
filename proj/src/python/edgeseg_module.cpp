#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "edgeseg/augment.hpp"
#include "edgeseg/cityscapes.hpp"
#include "edgeseg/edge_extract.hpp"
#include "edgeseg/edge_head.hpp"
#include "edgeseg/metrics.hpp"
#include "edgeseg/png_io.hpp"
#include "edgeseg/toytrain.hpp"

namespace py = pybind11;
using namespace edgeseg;
using nlohmann::json;

namespace {

// numpy <-> core type conversions. Arrays are copied at the boundary; the
// core types stay value-semantic.

LabelMap label_from_array(const py::array_t<std::uint8_t>& arr) {
  if (arr.ndim() != 2) throw py::value_error("label map must be a 2-D uint8 array");
  LabelMap map(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
  auto view = arr.unchecked<2>();
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) map.at(x, y) = view(y, x);
  validate(map);
  return map;
}

py::array_t<std::uint8_t> label_to_array(const LabelMap& map) {
  py::array_t<std::uint8_t> arr({map.height, map.width});
  auto view = arr.mutable_unchecked<2>();
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) view(y, x) = map.at(x, y);
  return arr;
}

RgbImage image_from_array(const py::array_t<std::uint8_t>& arr) {
  if (arr.ndim() != 3 || arr.shape(2) != 3)
    throw py::value_error("image must be an (H, W, 3) uint8 array");
  RgbImage img(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
  auto view = arr.unchecked<3>();
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y)[c] = view(y, x, c);
  return img;
}

py::array_t<std::uint8_t> image_to_array(const RgbImage& img) {
  py::array_t<std::uint8_t> arr({img.height, img.width, 3});
  auto view = arr.mutable_unchecked<3>();
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) view(y, x, c) = img.at(x, y)[c];
  return arr;
}

Tensor3 tensor_from_array(const py::array_t<float>& arr) {
  if (arr.ndim() != 3) throw py::value_error("tensor must be a (C, H, W) float32 array");
  Tensor3 t(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)),
            static_cast<int>(arr.shape(2)));
  auto view = arr.unchecked<3>();
  for (int c = 0; c < t.channels; ++c)
    for (int y = 0; y < t.height; ++y)
      for (int x = 0; x < t.width; ++x) t.at(c, y, x) = view(c, y, x);
  return t;
}

py::array_t<float> tensor_to_array(const Tensor3& t) {
  py::array_t<float> arr({t.channels, t.height, t.width});
  auto view = arr.mutable_unchecked<3>();
  for (int c = 0; c < t.channels; ++c)
    for (int y = 0; y < t.height; ++y)
      for (int x = 0; x < t.width; ++x) view(c, y, x) = t.at(c, y, x);
  return arr;
}

py::array_t<std::uint8_t> mask_to_array(const std::vector<std::uint8_t>& data, int h, int w) {
  py::array_t<std::uint8_t> arr({h, w});
  auto view = arr.mutable_unchecked<2>();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) view(y, x) = data[static_cast<std::size_t>(y) * w + x];
  return arr;
}

BinaryEdgeMap edge_map_from_arrays(const py::array_t<std::uint8_t>& edges,
                                   const py::array_t<std::uint8_t>& valid) {
  if (edges.ndim() != 2 || valid.ndim() != 2 || edges.shape(0) != valid.shape(0) ||
      edges.shape(1) != valid.shape(1))
    throw py::value_error("edges and valid must be matching 2-D uint8 arrays");
  BinaryEdgeMap map(static_cast<int>(edges.shape(1)), static_cast<int>(edges.shape(0)));
  auto ev = edges.unchecked<2>();
  auto vv = valid.unchecked<2>();
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) {
      std::size_t i = static_cast<std::size_t>(y) * map.width + x;
      map.edges[i] = ev(y, x) ? 1 : 0;
      map.valid[i] = vv(y, x) ? 1 : 0;
    }
  return map;
}

py::object json_to_py(const json& j) {
  switch (j.type()) {
    case json::value_t::null: return py::none();
    case json::value_t::boolean: return py::bool_(j.get<bool>());
    case json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case json::value_t::number_float: return py::float_(j.get<double>());
    case json::value_t::string: return py::str(j.get<std::string>());
    case json::value_t::array: {
      py::list out;
      for (const json& item : j) out.append(json_to_py(item));
      return out;
    }
    case json::value_t::object: {
      py::dict out;
      for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
      return out;
    }
    default: return py::none();
  }
}

json py_to_json(const py::handle& obj) {
  if (obj.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
  if (py::isinstance<py::int_>(obj)) return obj.cast<std::int64_t>();
  if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
  if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
  if (py::isinstance<py::dict>(obj)) {
    json out = json::object();
    for (const auto& item : obj.cast<py::dict>())
      out[item.first.cast<std::string>()] = py_to_json(item.second);
    return out;
  }
  if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
    json out = json::array();
    for (const auto& item : obj.cast<py::sequence>()) out.push_back(py_to_json(item));
    return out;
  }
  throw py::value_error("unsupported config value type");
}

Conv3x3 conv_from_arrays(const py::array_t<float>& weights, const py::array_t<float>& bias) {
  if (weights.ndim() != 4 || weights.shape(2) != 3 || weights.shape(3) != 3)
    throw py::value_error("weights must be an (O, C, 3, 3) float32 array");
  int out_ch = static_cast<int>(weights.shape(0));
  int in_ch = static_cast<int>(weights.shape(1));
  if (bias.ndim() != 1 || bias.shape(0) != out_ch)
    throw py::value_error("bias must be an (O,) float32 array");
  Conv3x3 params(in_ch, out_ch);
  auto wv = weights.unchecked<4>();
  auto bv = bias.unchecked<1>();
  for (int o = 0; o < out_ch; ++o) {
    params.bias[o] = bv(o);
    for (int c = 0; c < in_ch; ++c)
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx)
          params.weights[params.weight_index(o, c, ky, kx)] = wv(o, c, ky, kx);
  }
  return params;
}

py::array_t<float> conv_weights_to_array(const std::vector<float>& weights, int out_ch, int in_ch) {
  py::array_t<float> arr({out_ch, in_ch, 3, 3});
  auto view = arr.mutable_unchecked<4>();
  std::size_t i = 0;
  for (int o = 0; o < out_ch; ++o)
    for (int c = 0; c < in_ch; ++c)
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) view(o, c, ky, kx) = weights[i++];
  return arr;
}

py::array_t<float> floats_to_array(const std::vector<float>& values) {
  py::array_t<float> arr(static_cast<py::ssize_t>(values.size()));
  auto view = arr.mutable_unchecked<1>();
  for (std::size_t i = 0; i < values.size(); ++i) view(static_cast<py::ssize_t>(i)) = values[i];
  return arr;
}

}  // namespace

PYBIND11_MODULE(_edgeseg, m) {
  m.doc() = "Edge-preserving semantic segmentation toolkit";

  py::register_exception<Error>(m, "Error");

  m.attr("NUM_CLASSES") = kNumClasses;
  m.attr("IGNORE_LABEL") = kIgnoreLabel;
  {
    py::list names;
    for (const char* name : cityscapes::kClassNames) names.append(py::str(name));
    m.attr("CLASS_NAMES") = names;
  }

  // PNG I/O
  m.def("load_label_map",
        [](const std::string& path) { return label_to_array(load_label_map(path)); },
        py::arg("path"));
  m.def("save_label_map",
        [](const py::array_t<std::uint8_t>& label, const std::string& path) {
          save_label_map(label_from_array(label), path);
        },
        py::arg("label"), py::arg("path"));
  m.def("load_rgb_image",
        [](const std::string& path) { return image_to_array(load_rgb_image(path)); },
        py::arg("path"));
  m.def("save_rgb_image",
        [](const py::array_t<std::uint8_t>& image, const std::string& path) {
          save_rgb_image(image_from_array(image), path);
        },
        py::arg("image"), py::arg("path"));

  // Edge extraction
  m.def("sobel_magnitude",
        [](const py::array_t<std::uint8_t>& label) {
          GradientMap grad = sobel_magnitude(label_from_array(label));
          py::array_t<float> arr({grad.height, grad.width});
          auto view = arr.mutable_unchecked<2>();
          for (int y = 0; y < grad.height; ++y)
            for (int x = 0; x < grad.width; ++x)
              view(y, x) = grad.magnitude[static_cast<std::size_t>(y) * grad.width + x];
          return arr;
        },
        py::arg("label"));
  m.def("edge_target",
        [](const py::array_t<std::uint8_t>& label) {
          BinaryEdgeMap target = edge_target(label_from_array(label));
          return py::make_tuple(mask_to_array(target.edges, target.height, target.width),
                                mask_to_array(target.valid, target.height, target.width));
        },
        py::arg("label"), "Returns (edges, valid) uint8 arrays");

  // Augmentation
  py::class_<InstancePatch>(m, "InstancePatch")
      .def_readonly("source_class", &InstancePatch::source_class)
      .def_readonly("x", &InstancePatch::x)
      .def_readonly("y", &InstancePatch::y)
      .def_readonly("width", &InstancePatch::width)
      .def_readonly("height", &InstancePatch::height)
      .def_property_readonly("mask",
                             [](const InstancePatch& p) {
                               return mask_to_array(p.mask, p.height, p.width);
                             })
      .def("mask_area", &InstancePatch::mask_area);

  m.def("class_histogram",
        [](const std::vector<py::array_t<std::uint8_t>>& labels) {
          ClassHistogram hist;
          for (const auto& arr : labels) accumulate(hist, label_from_array(arr));
          py::dict out;
          out["counts"] = hist.counts;
          out["ignore_count"] = hist.ignore_count;
          out["frequencies"] = hist.frequencies();
          return out;
        },
        py::arg("labels"));
  m.def("extract_instances",
        [](const py::array_t<std::uint8_t>& label, const py::array_t<std::uint8_t>& image,
           int class_id, int min_pixels) {
          return extract_instances(label_from_array(label), image_from_array(image),
                                   static_cast<std::uint8_t>(class_id), min_pixels);
        },
        py::arg("label"), py::arg("image"), py::arg("class_id"), py::arg("min_pixels") = 64);
  m.def("transform_patch", &transform_patch, py::arg("patch"), py::arg("scale"), py::arg("flip"));
  m.def("paste_patch",
        [](const py::array_t<std::uint8_t>& image, const py::array_t<std::uint8_t>& label,
           const InstancePatch& patch, int x, int y) {
          auto [out_image, out_label] =
              paste_patch(image_from_array(image), label_from_array(label), patch, x, y);
          return py::make_tuple(image_to_array(out_image), label_to_array(out_label));
        },
        py::arg("image"), py::arg("label"), py::arg("patch"), py::arg("x"), py::arg("y"));
  m.def("augment_sample",
        [](const py::array_t<std::uint8_t>& image, const py::array_t<std::uint8_t>& label,
           const std::vector<InstancePatch>& donors, const py::dict& config_dict,
           std::uint64_t seed) {
          AugmentConfig config = augment_config_from_json(py_to_json(config_dict));
          Pcg32 rng(seed);
          AugmentResult result = augment_sample(image_from_array(image), label_from_array(label),
                                                donors, config, rng);
          py::list log;
          for (const PasteRecord& record : result.log.pastes) log.append(json_to_py(to_json(record)));
          py::dict out;
          out["image"] = image_to_array(result.image);
          out["label"] = label_to_array(result.label);
          out["log"] = log;
          out["empty_donor_pool"] = result.log.empty_donor_pool;
          return out;
        },
        py::arg("image"), py::arg("label"), py::arg("donors"),
        py::arg("config") = py::dict(), py::arg("seed") = 0);

  // Edge head
  m.def("conv3x3_forward",
        [](const py::array_t<float>& input, const py::array_t<float>& weights,
           const py::array_t<float>& bias) {
          return tensor_to_array(conv3x3_forward(tensor_from_array(input),
                                                 conv_from_arrays(weights, bias)));
        },
        py::arg("input"), py::arg("weights"), py::arg("bias"));
  m.def("conv3x3_backward",
        [](const py::array_t<float>& input, const py::array_t<float>& weights,
           const py::array_t<float>& bias, const py::array_t<float>& grad_output) {
          Conv3x3 params = conv_from_arrays(weights, bias);
          ConvGrads grads = conv3x3_backward(tensor_from_array(input), params,
                                             tensor_from_array(grad_output));
          return py::make_tuple(
              conv_weights_to_array(grads.weights, params.out_channels, params.in_channels),
              floats_to_array(grads.bias), tensor_to_array(grads.input));
        },
        py::arg("input"), py::arg("weights"), py::arg("bias"), py::arg("grad_output"),
        "Returns (grad_weights, grad_bias, grad_input)");
  m.def("softmax_xent2d",
        [](const py::array_t<float>& logits, const py::array_t<std::uint8_t>& edges,
           const py::array_t<std::uint8_t>& valid) {
          Xent2dResult result = softmax_xent2d(tensor_from_array(logits),
                                               edge_map_from_arrays(edges, valid));
          return py::make_tuple(result.loss, tensor_to_array(result.grad_logits),
                                result.valid_pixels);
        },
        py::arg("logits"), py::arg("edges"), py::arg("valid"),
        "Returns (loss, grad_logits, valid_pixels)");
  m.def("edge_loss",
        [](const py::array_t<float>& seg_output, const py::array_t<std::uint8_t>& label,
           const py::array_t<float>& weights, const py::array_t<float>& bias) {
          Conv3x3 params = conv_from_arrays(weights, bias);
          EdgeLossResult result = edge_loss(tensor_from_array(seg_output),
                                            label_from_array(label), params);
          py::dict out;
          out["loss"] = result.loss;
          out["grad_input"] = tensor_to_array(result.grad_input);
          out["grad_weights"] =
              conv_weights_to_array(params.grad_weights, params.out_channels, params.in_channels);
          out["grad_bias"] = floats_to_array(params.grad_bias);
          out["valid_pixel_count"] = result.valid_pixel_count;
          return out;
        },
        py::arg("seg_output"), py::arg("label"), py::arg("weights"), py::arg("bias"));
  m.def("gradcheck_suite",
        [](std::uint64_t seed) {
          py::list out;
          for (const GradCheckCase& c : run_gradcheck_suite(seed))
            out.append(py::make_tuple(c.name, c.max_rel_error));
          GradCheckCase endtoend = endtoend_gradcheck(seed);
          out.append(py::make_tuple(endtoend.name, endtoend.max_rel_error));
          return out;
        },
        py::arg("seed") = 0);

  // Metrics
  py::class_<ConfusionMatrix>(m, "ConfusionMatrix")
      .def(py::init<>())
      .def("accumulate",
           [](ConfusionMatrix& cm, const py::array_t<std::uint8_t>& pred,
              const py::array_t<std::uint8_t>& truth) {
             accumulate(cm, label_from_array(pred), label_from_array(truth));
           },
           py::arg("pred"), py::arg("truth"))
      .def("merge", &ConfusionMatrix::merge)
      .def("total", &ConfusionMatrix::total)
      .def("counts",
           [](const ConfusionMatrix& cm) {
             py::array_t<std::uint64_t> arr({kNumClasses, kNumClasses});
             auto view = arr.mutable_unchecked<2>();
             for (int t = 0; t < kNumClasses; ++t)
               for (int p = 0; p < kNumClasses; ++p) view(t, p) = cm.at(t, p);
             return arr;
           })
      .def("iou_per_class",
           [](const ConfusionMatrix& cm) {
             py::list out;
             for (const auto& iou : iou_per_class(cm))
               out.append(iou ? py::object(py::float_(*iou)) : py::object(py::none()));
             return out;
           })
      .def("mean_iou", [](const ConfusionMatrix& cm) { return mean_iou(cm); })
      .def("freq_weighted_iou", [](const ConfusionMatrix& cm) { return freq_weighted_iou(cm); })
      .def("report", [](const ConfusionMatrix& cm) {
        return json_to_py(report(cm, cityscapes_category_map()));
      });

  // Toy training
  m.def("synth_dataset",
        [](int n, int size, int num_classes, std::uint64_t seed) {
          py::list out;
          for (const Sample& sample : synth_dataset(n, size, num_classes, seed))
            out.append(py::make_tuple(image_to_array(sample.first), label_to_array(sample.second)));
          return out;
        },
        py::arg("n"), py::arg("size") = 64, py::arg("num_classes") = 4, py::arg("seed") = 0);
  m.def("train",
        [](const py::dict& config_dict, const py::list& dataset) {
          TrainConfig config = train_config_from_json(py_to_json(config_dict));
          std::vector<Sample> samples;
          for (const auto& item : dataset) {
            auto pair = item.cast<py::tuple>();
            samples.emplace_back(image_from_array(pair[0].cast<py::array_t<std::uint8_t>>()),
                                 label_from_array(pair[1].cast<py::array_t<std::uint8_t>>()));
          }
          TrainResult result = train(config, samples);
          py::dict out;
          py::list epochs;
          for (const EpochRecord& record : result.log.epochs)
            epochs.append(json_to_py(to_json(record)));
          out["epochs"] = epochs;
          out["initial_loss"] = result.initial_loss;
          out["final_loss"] = result.final_loss;
          return out;
        },
        py::arg("config"), py::arg("dataset"));
  m.def("boundary_f1",
        [](const py::array_t<std::uint8_t>& pred, const py::array_t<std::uint8_t>& truth,
           int tolerance) {
          return boundary_f1(label_from_array(pred), label_from_array(truth), tolerance);
        },
        py::arg("pred"), py::arg("truth"), py::arg("tolerance") = 2);
  m.def("ablation",
        [](const py::dict& config_dict) {
          return json_to_py(to_json(ablation(train_config_from_json(py_to_json(config_dict)))));
        },
        py::arg("config") = py::dict());
}
