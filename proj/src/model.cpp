// Copyright 2026 The MIBCI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mibci/model.hpp"

#include <zlib.h>

#include "mibci/util.hpp"

namespace mibci::nn {
namespace {

constexpr std::string_view kMagic = "MIBC";
constexpr std::uint16_t kFormatVersion = 1;

// Layer tags in the model file.
enum LayerTag : std::uint32_t {
  kConv2d = 1,
  kMaxPool = 2,
  kRelu = 3,
  kDropout = 4,
  kFlatten = 5,
  kDense = 6,
  kSoftmax = 7,
};

std::uint32_t crc32_of(std::string_view data) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(data.data()),
              static_cast<uInt>(data.size())));
}

}  // namespace

std::vector<std::vector<int>> check_shapes(const std::vector<LayerSpec>& layers,
                                           const std::vector<int>& input_dims) {
  if (layers.empty()) fail("ShapeMismatch", "empty layer stack");
  if (input_dims.size() != 3) {
    fail("ShapeMismatch", "model input must be (channels, height, width)");
  }
  std::vector<std::vector<int>> shapes;
  std::vector<int> dims = input_dims;
  int softmax_count = 0;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const LayerSpec& spec = layers[li];
    if (softmax_count > 0) {
      fail("ShapeMismatch", "softmax must be the terminal layer");
    }
    if (const auto* conv = std::get_if<Conv2dSpec>(&spec)) {
      if (dims.size() != 3 || dims[0] != conv->in_ch) {
        fail("ShapeMismatch", "conv layer " + std::to_string(li) +
                                  " expects " + std::to_string(conv->in_ch) +
                                  " channels, got " + dims_to_string(dims));
      }
      const int oh = conv_out_extent(dims[1], conv->kernel, conv->stride, conv->pad);
      const int ow = conv_out_extent(dims[2], conv->kernel, conv->stride, conv->pad);
      if (oh <= 0 || ow <= 0) {
        fail("ShapeMismatch", "conv layer " + std::to_string(li) +
                                  " produces an empty output");
      }
      dims = {conv->out_ch, oh, ow};
    } else if (const auto* pool = std::get_if<MaxPoolSpec>(&spec)) {
      if (dims.size() != 3) fail("ShapeMismatch", "maxpool needs a 3-d input");
      const int oh = (dims[1] - pool->kernel) / pool->stride + 1;
      const int ow = (dims[2] - pool->kernel) / pool->stride + 1;
      if (oh <= 0 || ow <= 0) {
        fail("ShapeMismatch", "maxpool layer " + std::to_string(li) +
                                  " produces an empty output");
      }
      dims = {dims[0], oh, ow};
    } else if (const auto* drop = std::get_if<DropoutSpec>(&spec)) {
      if (!(drop->rate >= 0.0 && drop->rate < 1.0)) {
        fail("ShapeMismatch", "dropout rate must lie in [0, 1)");
      }
    } else if (std::holds_alternative<FlattenSpec>(spec)) {
      int n = 1;
      for (int d : dims) n *= d;
      dims = {n};
    } else if (const auto* dense = std::get_if<DenseSpec>(&spec)) {
      int n = 1;
      for (int d : dims) n *= d;
      if (dims.size() != 1 || n != dense->in) {
        fail("ShapeMismatch", "dense layer " + std::to_string(li) +
                                  " expects a flat input of " +
                                  std::to_string(dense->in) + ", got " +
                                  dims_to_string(dims));
      }
      dims = {dense->out};
    } else if (std::holds_alternative<SoftmaxSpec>(spec)) {
      if (dims.size() != 1) fail("ShapeMismatch", "softmax needs a flat input");
      ++softmax_count;
    }
    shapes.push_back(dims);
  }
  if (softmax_count != 1) {
    fail("ShapeMismatch", "model must end with exactly one softmax");
  }
  return shapes;
}

std::vector<LayerSpec> default_architecture(const std::vector<int>& input_dims,
                                            int n_classes) {
  if (input_dims.size() != 3) {
    fail("ShapeMismatch", "default architecture needs (c, h, w) input dims");
  }
  const int c = input_dims[0];
  int h = input_dims[1], w = input_dims[2];
  std::vector<LayerSpec> layers;
  layers.push_back(Conv2dSpec{c, 16, 3, 1, 1});
  layers.push_back(ReluSpec{});
  layers.push_back(Conv2dSpec{16, 16, 3, 1, 1});
  layers.push_back(ReluSpec{});
  layers.push_back(MaxPoolSpec{2, 2});
  h = (h - 2) / 2 + 1;
  w = (w - 2) / 2 + 1;
  layers.push_back(Conv2dSpec{16, 32, 3, 1, 1});
  layers.push_back(ReluSpec{});
  layers.push_back(Conv2dSpec{32, 32, 3, 1, 1});
  layers.push_back(ReluSpec{});
  layers.push_back(MaxPoolSpec{2, 2});
  h = (h - 2) / 2 + 1;
  w = (w - 2) / 2 + 1;
  layers.push_back(Conv2dSpec{32, 64, 3, 1, 1});
  layers.push_back(ReluSpec{});
  layers.push_back(Conv2dSpec{64, 64, 3, 1, 1});
  layers.push_back(ReluSpec{});
  layers.push_back(FlattenSpec{});
  layers.push_back(DenseSpec{64 * h * w, 128});
  layers.push_back(ReluSpec{});
  layers.push_back(DropoutSpec{0.5});
  layers.push_back(DenseSpec{128, n_classes});
  layers.push_back(SoftmaxSpec{});
  return layers;
}

std::vector<LayerSpec> parse_architecture(const std::vector<std::string>& tokens) {
  std::vector<LayerSpec> layers;
  for (const std::string& token : tokens) {
    const std::vector<std::string> parts = split(token, ':');
    const std::string& kind = parts[0];
    const auto arg = [&](std::size_t i) {
      if (i >= parts.size()) {
        fail("ParseError", "layer token '" + token + "' is missing arguments");
      }
      return static_cast<int>(parse_int(parts[i]));
    };
    if (kind == "conv") {
      layers.push_back(Conv2dSpec{arg(1), arg(2), arg(3), arg(4), arg(5)});
    } else if (kind == "pool") {
      layers.push_back(MaxPoolSpec{arg(1), arg(2)});
    } else if (kind == "relu") {
      layers.push_back(ReluSpec{});
    } else if (kind == "dropout") {
      if (parts.size() < 2) fail("ParseError", "dropout needs a rate");
      layers.push_back(DropoutSpec{parse_double(parts[1])});
    } else if (kind == "flatten") {
      layers.push_back(FlattenSpec{});
    } else if (kind == "dense") {
      layers.push_back(DenseSpec{arg(1), arg(2)});
    } else if (kind == "softmax") {
      layers.push_back(SoftmaxSpec{});
    } else {
      fail("ParseError", "unknown layer kind '" + kind + "'");
    }
  }
  return layers;
}

std::vector<std::string> architecture_to_tokens(
    const std::vector<LayerSpec>& layers) {
  std::vector<std::string> tokens;
  for (const LayerSpec& spec : layers) {
    if (const auto* conv = std::get_if<Conv2dSpec>(&spec)) {
      tokens.push_back("conv:" + std::to_string(conv->in_ch) + ":" +
                       std::to_string(conv->out_ch) + ":" +
                       std::to_string(conv->kernel) + ":" +
                       std::to_string(conv->stride) + ":" +
                       std::to_string(conv->pad));
    } else if (const auto* pool = std::get_if<MaxPoolSpec>(&spec)) {
      tokens.push_back("pool:" + std::to_string(pool->kernel) + ":" +
                       std::to_string(pool->stride));
    } else if (std::holds_alternative<ReluSpec>(spec)) {
      tokens.push_back("relu");
    } else if (const auto* drop = std::get_if<DropoutSpec>(&spec)) {
      tokens.push_back("dropout:" + format_double(drop->rate));
    } else if (std::holds_alternative<FlattenSpec>(spec)) {
      tokens.push_back("flatten");
    } else if (const auto* dense = std::get_if<DenseSpec>(&spec)) {
      tokens.push_back("dense:" + std::to_string(dense->in) + ":" +
                       std::to_string(dense->out));
    } else {
      tokens.push_back("softmax");
    }
  }
  return tokens;
}

std::string serialize_model(const Model<double>& model) {
  BinaryWriter w;

  w.u32(static_cast<std::uint32_t>(model.layers.size()));
  for (const LayerSpec& spec : model.layers) {
    if (const auto* conv = std::get_if<Conv2dSpec>(&spec)) {
      w.u32(kConv2d);
      w.u32(conv->in_ch);
      w.u32(conv->out_ch);
      w.u32(conv->kernel);
      w.u32(conv->stride);
      w.u32(conv->pad);
    } else if (const auto* pool = std::get_if<MaxPoolSpec>(&spec)) {
      w.u32(kMaxPool);
      w.u32(pool->kernel);
      w.u32(pool->stride);
    } else if (std::holds_alternative<ReluSpec>(spec)) {
      w.u32(kRelu);
    } else if (const auto* drop = std::get_if<DropoutSpec>(&spec)) {
      w.u32(kDropout);
      w.f64(drop->rate);
    } else if (std::holds_alternative<FlattenSpec>(spec)) {
      w.u32(kFlatten);
    } else if (const auto* dense = std::get_if<DenseSpec>(&spec)) {
      w.u32(kDense);
      w.u32(dense->in);
      w.u32(dense->out);
    } else {
      w.u32(kSoftmax);
    }
  }

  w.u32(static_cast<std::uint32_t>(model.input_dims.size()));
  for (int d : model.input_dims) w.u32(static_cast<std::uint32_t>(d));
  w.u32(static_cast<std::uint32_t>(model.class_names.size()));
  for (const std::string& name : model.class_names) w.str(name);
  w.u32(static_cast<std::uint32_t>(model.norm_stats.mean.size()));
  for (Eigen::Index i = 0; i < model.norm_stats.mean.size(); ++i) {
    w.f64(model.norm_stats.mean[i]);
  }
  for (Eigen::Index i = 0; i < model.norm_stats.stddev.size(); ++i) {
    w.f64(model.norm_stats.stddev[i]);
  }
  w.u64(model.rng_seed);

  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    for (const Tensor<double>* t : {&model.weights[li], &model.biases[li]}) {
      for (Eigen::Index i = 0; i < t->size(); ++i) w.f64(t->values[i]);
    }
  }

  // Prefix: magic, version, and the total file length so truncation is
  // distinguishable from corruption.
  BinaryWriter head;
  head.bytes(kMagic);
  head.u16(kFormatVersion);
  head.u64(kMagic.size() + 2 + 8 + w.data().size() + 4);
  std::string out = head.data() + w.data();
  BinaryWriter crc;
  crc.u32(crc32_of(out));
  return out + crc.data();
}

Model<double> deserialize_model(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 2 + 8 + 4) {
    fail("TruncatedFile", "model file too small");
  }
  BinaryReader header(bytes);
  if (header.bytes(4) != kMagic) fail("BadMagic", "not a model file");
  const std::uint16_t version = header.u16();
  if (version != kFormatVersion) {
    fail("VersionMismatch", "model format version " + std::to_string(version) +
                                ", expected " + std::to_string(kFormatVersion));
  }
  const std::uint64_t declared = header.u64();
  if (bytes.size() < declared) {
    fail("TruncatedFile", "model file holds " + std::to_string(bytes.size()) +
                              " of " + std::to_string(declared) + " bytes");
  }
  if (bytes.size() > declared) {
    fail("MalformedHeader", "trailing bytes after model payload");
  }
  const std::string_view payload = bytes.substr(0, bytes.size() - 4);
  {
    BinaryReader tail(bytes.substr(bytes.size() - 4));
    if (tail.u32() != crc32_of(payload)) {
      fail("ChecksumMismatch", "model file checksum does not match");
    }
  }
  BinaryReader r(payload.substr(kMagic.size() + 2 + 8));

  Model<double> m;
  const std::uint32_t n_layers = r.u32();
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    switch (r.u32()) {
      case kConv2d: {
        Conv2dSpec c{};
        c.in_ch = static_cast<int>(r.u32());
        c.out_ch = static_cast<int>(r.u32());
        c.kernel = static_cast<int>(r.u32());
        c.stride = static_cast<int>(r.u32());
        c.pad = static_cast<int>(r.u32());
        m.layers.push_back(c);
        break;
      }
      case kMaxPool: {
        MaxPoolSpec p{};
        p.kernel = static_cast<int>(r.u32());
        p.stride = static_cast<int>(r.u32());
        m.layers.push_back(p);
        break;
      }
      case kRelu:
        m.layers.push_back(ReluSpec{});
        break;
      case kDropout:
        m.layers.push_back(DropoutSpec{r.f64()});
        break;
      case kFlatten:
        m.layers.push_back(FlattenSpec{});
        break;
      case kDense: {
        DenseSpec d{};
        d.in = static_cast<int>(r.u32());
        d.out = static_cast<int>(r.u32());
        m.layers.push_back(d);
        break;
      }
      case kSoftmax:
        m.layers.push_back(SoftmaxSpec{});
        break;
      default:
        fail("MalformedHeader", "unknown layer tag in model file");
    }
  }

  const std::uint32_t n_dims = r.u32();
  for (std::uint32_t i = 0; i < n_dims; ++i) {
    m.input_dims.push_back(static_cast<int>(r.u32()));
  }
  const std::uint32_t n_classes = r.u32();
  for (std::uint32_t i = 0; i < n_classes; ++i) m.class_names.push_back(r.str());
  const std::uint32_t n_rows = r.u32();
  m.norm_stats.mean.resize(n_rows);
  m.norm_stats.stddev.resize(n_rows);
  for (std::uint32_t i = 0; i < n_rows; ++i) m.norm_stats.mean[i] = r.f64();
  for (std::uint32_t i = 0; i < n_rows; ++i) m.norm_stats.stddev[i] = r.f64();
  m.rng_seed = r.u64();

  check_shapes(m.layers, m.input_dims);
  m.weights.resize(m.layers.size());
  m.biases.resize(m.layers.size());
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    if (const auto* conv = std::get_if<Conv2dSpec>(&m.layers[li])) {
      m.weights[li] = Tensor<double>(
          {conv->out_ch, conv->in_ch, conv->kernel, conv->kernel});
      m.biases[li] = Tensor<double>({conv->out_ch});
    } else if (const auto* dense = std::get_if<DenseSpec>(&m.layers[li])) {
      m.weights[li] = Tensor<double>({dense->out, dense->in});
      m.biases[li] = Tensor<double>({dense->out});
    }
    for (Tensor<double>* t : {&m.weights[li], &m.biases[li]}) {
      for (Eigen::Index i = 0; i < t->size(); ++i) t->values[i] = r.f64();
    }
  }
  if (r.remaining() != 0) {
    fail("MalformedHeader", "trailing bytes in model file");
  }
  return m;
}

void save_model(const Model<double>& model, const std::filesystem::path& path) {
  atomic_write_file(path, serialize_model(model));
}

Model<double> load_model(const std::filesystem::path& path) {
  return deserialize_model(read_file(path));
}

}  // namespace mibci::nn
