#include "vsa/network.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "vsa/errors.hpp"

namespace vsa {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kEncodingConv: return "encoding-conv";
    case LayerKind::kConv: return "conv";
    case LayerKind::kMaxPool2: return "maxpool2";
    case LayerKind::kFullyConnected: return "fc";
  }
  return "?";
}

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

  char take() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_space() {
    while (!done() && std::isspace(static_cast<unsigned char>(peek()))) take();
  }

  bool match_ci(std::string_view word) {
    if (text_.size() - pos_ < word.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(text_[pos_ + i])) !=
          std::tolower(static_cast<unsigned char>(word[i]))) {
        return false;
      }
    }
    for (std::size_t i = 0; i < word.size(); ++i) take();
    return true;
  }

  std::string_view take_while(auto pred) {
    const std::size_t start = pos_;
    while (!done() && pred(peek())) take();
    return text_.substr(start, pos_ - start);
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, column_); }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

int parse_int(Cursor& cur, std::string_view digits, std::string_view what) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    cur.fail("invalid " + std::string(what) + " '" + std::string(digits) + "'");
  }
  return value;
}

void parse_attributes(Cursor& cur, LayerSpec& layer) {
  cur.take();  // '{'
  for (;;) {
    cur.skip_space();
    const std::size_t line = cur.line();
    const std::size_t col = cur.column();
    const auto key = cur.take_while([](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; });
    cur.skip_space();
    if (cur.peek() != '=') cur.fail("expected '=' in attribute block");
    cur.take();
    cur.skip_space();
    const auto value = cur.take_while([](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+';
    });
    if (key == "vth") {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(v)) {
        throw ParseError("invalid vth '" + std::string(value) + "'", line, col);
      }
      layer.v_th = v;
    } else if (key == "k") {
      const auto x = value.find('x');
      if (x == std::string_view::npos) {
        layer.kernel_h = layer.kernel_w = parse_int(cur, value, "kernel size");
      } else {
        layer.kernel_h = parse_int(cur, value.substr(0, x), "kernel height");
        layer.kernel_w = parse_int(cur, value.substr(x + 1), "kernel width");
      }
      if (layer.kernel_h <= 0 || layer.kernel_w <= 0) throw ParseError("kernel size must be positive", line, col);
    } else if (key == "pad") {
      layer.padding = parse_int(cur, value, "padding");
      if (layer.padding < 0) throw ParseError("padding must be non-negative", line, col);
    } else {
      throw ParseError("unknown attribute '" + std::string(key) + "'", line, col);
    }
    cur.skip_space();
    if (cur.peek() == ',') {
      cur.take();
      continue;
    }
    if (cur.peek() == '}') {
      cur.take();
      return;
    }
    cur.fail("expected ',' or '}' in attribute block");
  }
}

LayerSpec parse_token(Cursor& cur, double default_vth) {
  LayerSpec layer;
  layer.v_th = default_vth;
  if (cur.match_ci("MP2")) {
    layer.kind = LayerKind::kMaxPool2;
    layer.kernel_h = layer.kernel_w = 2;
    layer.padding = 0;
    return layer;
  }
  const auto digits = cur.take_while([](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
  if (digits.empty()) cur.fail("unknown layer token");
  layer.out_channels = parse_int(cur, digits, "channel count");
  if (layer.out_channels <= 0) cur.fail("channel count must be positive");
  if (cur.match_ci("Conv")) {
    layer.kind = LayerKind::kConv;
    if (cur.match_ci("(encoding)")) layer.kind = LayerKind::kEncodingConv;
  } else if (cur.match_ci("fc")) {
    layer.kind = LayerKind::kFullyConnected;
    layer.kernel_h = layer.kernel_w = 1;
    layer.padding = 0;
  } else {
    cur.fail("unknown layer token after '" + std::string(digits) + "'");
  }
  if (cur.peek() == '{') parse_attributes(cur, layer);
  return layer;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

NetworkDescription parse_network(std::string_view text, double default_vth) {
  Cursor cur(text);
  NetworkDescription net;
  cur.skip_space();
  if (cur.done()) cur.fail("empty network");
  for (;;) {
    cur.skip_space();
    const std::size_t line = cur.line();
    const std::size_t col = cur.column();
    LayerSpec layer = parse_token(cur, default_vth);
    if (layer.kind == LayerKind::kEncodingConv && !net.layers.empty()) {
      throw ParseError("encoding layer must be the first layer", line, col);
    }
    if (net.layers.empty() && layer.kind != LayerKind::kEncodingConv) {
      throw ParseError("first layer must be an encoding conv", line, col);
    }
    if (layer.kind == LayerKind::kMaxPool2 && net.layers.back().kind == LayerKind::kFullyConnected) {
      throw ParseError("MP2 cannot follow a fully connected layer", line, col);
    }
    if (layer.kind == LayerKind::kFullyConnected && (layer.kernel_h != 1 || layer.kernel_w != 1 || layer.padding != 0)) {
      throw ParseError("fully connected layers take no kernel or padding", line, col);
    }
    net.layers.push_back(layer);
    cur.skip_space();
    if (cur.done()) break;
    if (cur.peek() != '-') cur.fail("expected '-' between layers");
    cur.take();
  }
  return net;
}

std::string print_network(const NetworkDescription& net) {
  std::string out;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    if (i) out += '-';
    switch (l.kind) {
      case LayerKind::kMaxPool2:
        out += "MP2";
        continue;
      case LayerKind::kEncodingConv: out += std::to_string(l.out_channels) + "Conv(encoding)"; break;
      case LayerKind::kConv: out += std::to_string(l.out_channels) + "Conv"; break;
      case LayerKind::kFullyConnected: out += std::to_string(l.out_channels) + "fc"; break;
    }
    std::vector<std::string> attrs;
    if (l.v_th != 1.0) attrs.push_back("vth=" + format_double(l.v_th));
    if (l.kind != LayerKind::kFullyConnected) {
      if (l.kernel_h != 3 || l.kernel_w != 3) {
        attrs.push_back(l.kernel_h == l.kernel_w
                            ? "k=" + std::to_string(l.kernel_h)
                            : "k=" + std::to_string(l.kernel_h) + "x" + std::to_string(l.kernel_w));
      }
      if (l.padding != 1) attrs.push_back("pad=" + std::to_string(l.padding));
    }
    if (!attrs.empty()) {
      out += '{';
      for (std::size_t a = 0; a < attrs.size(); ++a) out += (a ? "," : "") + attrs[a];
      out += '}';
    }
  }
  return out;
}

ValidatedNetwork validate(const NetworkDescription& net, Shape3 input) {
  if (net.layers.empty()) throw ShapeError("network has no layers");
  if (!input.positive()) throw ShapeError("input dimensions must be positive, got " + input.str());
  if (net.time_steps <= 0) throw ShapeError("time steps must be positive");
  ValidatedNetwork out{net, input, {}};
  Shape3 cur = input;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    auto fail = [&](const std::string& why) -> void {
      throw ShapeError("layer " + std::to_string(i) + " (" + to_string(l.kind) + ") on input " + cur.str() + ": " + why);
    };
    if ((l.kind == LayerKind::kEncodingConv) != (i == 0)) fail("the encoding conv must be exactly the first layer");
    AnnotatedLayer a{l, cur, {}, false};
    switch (l.kind) {
      case LayerKind::kEncodingConv:
      case LayerKind::kConv: {
        const int h = cur.height + 2 * l.padding - l.kernel_h + 1;
        const int w = cur.width + 2 * l.padding - l.kernel_w + 1;
        if (l.kernel_h <= 0 || l.kernel_w <= 0) fail("kernel must be positive");
        if (h <= 0 || w <= 0) fail("kernel does not fit the padded input");
        a.output = {l.out_channels, h, w};
        break;
      }
      case LayerKind::kMaxPool2:
        if (cur.height % 2 || cur.width % 2) fail("MP2 needs even spatial dimensions");
        a.output = {cur.channels, cur.height / 2, cur.width / 2};
        break;
      case LayerKind::kFullyConnected:
        a.flatten_input = cur.height != 1 || cur.width != 1;
        a.output = {l.out_channels, 1, 1};
        break;
    }
    cur = a.output;
    out.layers.push_back(a);
  }
  return out;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> kPresets = {
      {"mnist", "64Conv(encoding)-MP2-64Conv-MP2-128fc-10fc", {1, 28, 28}},
      {"cifar10",
       "128Conv(encoding)-128Conv-128Conv-MP2-192Conv-192Conv-192Conv-192Conv-MP2-256Conv-256Conv-256Conv-"
       "256Conv-MP2-256fc-10fc",
       {3, 32, 32}},
  };
  return kPresets;
}

std::optional<Preset> find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

}  // namespace vsa
