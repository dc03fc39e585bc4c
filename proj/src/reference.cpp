#include "vsa/reference.hpp"

#include <algorithm>

#include "vsa/errors.hpp"

namespace vsa {

namespace {

template <typename Sample>
IntTensor conv_generic(Shape3 in, const BinaryWeightTensor& w, int padding, Sample sample) {
  if (w.in_channels() != in.channels) {
    throw ShapeError("conv input has " + std::to_string(in.channels) + " channels, weights expect " +
                     std::to_string(w.in_channels()));
  }
  if (padding < 0) throw ShapeError("padding must be non-negative");
  const int oh = in.height + 2 * padding - w.kernel_h() + 1;
  const int ow = in.width + 2 * padding - w.kernel_w() + 1;
  if (oh <= 0 || ow <= 0) throw ShapeError("kernel does not fit the padded input");
  IntTensor out({w.out_channels(), oh, ow});
  for (int o = 0; o < w.out_channels(); ++o) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        std::int64_t sum = 0;
        for (int c = 0; c < in.channels; ++c) {
          for (int ky = 0; ky < w.kernel_h(); ++ky) {
            const int iy = y + ky - padding;
            if (iy < 0 || iy >= in.height) continue;
            for (int kx = 0; kx < w.kernel_w(); ++kx) {
              const int ix = x + kx - padding;
              if (ix < 0 || ix >= in.width) continue;
              sum += static_cast<std::int64_t>(w.weight(o, c, ky, kx)) * sample(c, iy, ix);
            }
          }
        }
        out.at(o, y, x) = static_cast<std::int32_t>(sum);
      }
    }
  }
  return out;
}

SpikeMap flatten(const SpikeMap& m) {
  SpikeMap flat({static_cast<int>(m.shape().count()), 1, 1});
  for (int c = 0; c < m.shape().channels; ++c)
    for (int y = 0; y < m.shape().height; ++y)
      for (int x = 0; x < m.shape().width; ++x) flat.set(static_cast<int>(m.shape().index(c, y, x)), 0, 0, m.at(c, y, x));
  return flat;
}

// Integrates one step of conv outputs into the membrane and returns the spikes.
SpikeMap integrate(const IntTensor& conv, const LayerParams& params, const FixedFormat& fmt, MembraneState& membrane) {
  SpikeMap spikes(conv.shape());
  for (int c = 0; c < conv.shape().channels; ++c) {
    const FoldedNeuronParams& n = params.neurons[static_cast<std::size_t>(c)];
    for (int y = 0; y < conv.shape().height; ++y) {
      for (int x = 0; x < conv.shape().width; ++x) {
        const Fixed drive = fmt.sub(fmt.from_int(conv.at(c, y, x)), n.bias);
        spikes.set(c, y, x, membrane.update(c, y, x, drive, n));
      }
    }
  }
  return spikes;
}

}  // namespace

IntTensor conv2d_oracle(const SpikeMap& input, const BinaryWeightTensor& weights, int padding) {
  return conv_generic(input.shape(), weights, padding, [&](int c, int y, int x) { return input.at(c, y, x); });
}

IntTensor conv2d_oracle(const ByteImage& input, const BinaryWeightTensor& weights, int padding) {
  return conv_generic(input.shape(), weights, padding, [&](int c, int y, int x) { return input.at(c, y, x); });
}

SpikeMap maxpool2_oracle(const SpikeMap& spikes) {
  const Shape3 s = spikes.shape();
  if (s.height % 2 || s.width % 2) throw ShapeError("maxpool2 needs even dimensions, got " + s.str());
  SpikeMap out({s.channels, s.height / 2, s.width / 2});
  for (int c = 0; c < s.channels; ++c) {
    for (int y = 0; y < s.height / 2; ++y) {
      for (int x = 0; x < s.width / 2; ++x) {
        std::uint8_t m = 0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) m = std::max(m, spikes.at(c, 2 * y + dy, 2 * x + dx));
        out.set(c, y, x, m);
      }
    }
  }
  return out;
}

NetworkRun run_network_oracle(const ModelBundle& bundle, const ByteImage& input, int time_steps) {
  if (time_steps <= 0) throw InvalidParameter("time steps must be positive");
  if (!(input.shape() == bundle.input)) {
    throw ShapeError("input " + input.shape().str() + " does not match network input " + bundle.input.str());
  }
  bundle.check_consistency();
  const ValidatedNetwork net = bundle.validated();
  const FixedFormat& fmt = bundle.format;

  NetworkRun run;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const AnnotatedLayer& layer = net.layers[li];
    const LayerParams& params = bundle.layers[li];
    SpikeTrain out(time_steps, layer.output);
    switch (layer.spec.kind) {
      case LayerKind::kEncodingConv: {
        const IntTensor conv = conv2d_oracle(input, params.weights, layer.spec.padding);
        MembraneState membrane(layer.output, fmt);
        for (int t = 0; t < time_steps; ++t) out.set_step(t, integrate(conv, params, fmt, membrane));
        break;
      }
      case LayerKind::kConv:
      case LayerKind::kFullyConnected: {
        const SpikeTrain& prev = run.layer_outputs.back();
        MembraneState membrane(layer.output, fmt);
        for (int t = 0; t < time_steps; ++t) {
          const SpikeMap in = layer.flatten_input ? flatten(prev.step(t)) : prev.step(t);
          const IntTensor conv = conv2d_oracle(in, params.weights, layer.spec.padding);
          out.set_step(t, integrate(conv, params, fmt, membrane));
        }
        break;
      }
      case LayerKind::kMaxPool2: {
        const SpikeTrain& prev = run.layer_outputs.back();
        for (int t = 0; t < time_steps; ++t) out.set_step(t, maxpool2_oracle(prev.step(t)));
        break;
      }
    }
    run.layer_outputs.push_back(std::move(out));
  }

  const SpikeTrain& last = run.layer_outputs.back();
  run.class_counts.assign(static_cast<std::size_t>(last.shape().count()), 0);
  for (int t = 0; t < time_steps; ++t) {
    const auto bits = last.step(t).bits();
    for (std::size_t i = 0; i < bits.size(); ++i) run.class_counts[i] += bits[i];
  }
  return run;
}

}  // namespace vsa
