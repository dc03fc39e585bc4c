#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vsa/tensor.hpp"

namespace vsa {

enum class LayerKind { kEncodingConv, kConv, kMaxPool2, kFullyConnected };

const char* to_string(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::kConv;
  int out_channels = 0;  // unused for kMaxPool2
  int kernel_h = 3;
  int kernel_w = 3;
  int padding = 1;
  double v_th = 1.0;

  bool has_weights() const { return kind != LayerKind::kMaxPool2; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct NetworkDescription {
  std::vector<LayerSpec> layers;
  int time_steps = 8;

  friend bool operator==(const NetworkDescription&, const NetworkDescription&) = default;
};

// A layer with the tensor shapes flowing in and out of it. For fully connected
// layers the input shape is the producer's map; flatten_input marks the
// implicit flatten to (C*H*W)x1x1.
struct AnnotatedLayer {
  LayerSpec spec;
  Shape3 input;
  Shape3 output;
  bool flatten_input = false;

  Shape3 compute_input() const {
    return flatten_input ? Shape3{static_cast<int>(input.count()), 1, 1} : input;
  }
};

struct ValidatedNetwork {
  NetworkDescription description;
  Shape3 input;
  std::vector<AnnotatedLayer> layers;

  const AnnotatedLayer& layer(std::size_t i) const { return layers.at(i); }
  Shape3 output() const { return layers.back().output; }
};

// Parses the dash-separated layer grammar, e.g.
//   64Conv(encoding)-MP2-64Conv-MP2-128fc-10fc
// Each token may carry an attribute block: 128Conv{vth=0.75,k=1,pad=0}.
NetworkDescription parse_network(std::string_view text, double default_vth = 1.0);

// Canonical text; parse_network(print_network(n)) == n.
std::string print_network(const NetworkDescription& net);

// Propagates shapes from the input through every layer. Throws ShapeError
// naming the first offending layer.
ValidatedNetwork validate(const NetworkDescription& net, Shape3 input);

struct Preset {
  std::string name;
  std::string text;
  Shape3 input;
};

std::optional<Preset> find_preset(std::string_view name);
const std::vector<Preset>& presets();

}  // namespace vsa
