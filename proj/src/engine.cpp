#include "vsa/engine.hpp"

#include <algorithm>

#include "vsa/errors.hpp"
#include "vsa/if_unit.hpp"
#include "vsa/reference.hpp"

namespace vsa::arch {

SpikeMap pad_map(const SpikeMap& map, int padding) {
  if (padding == 0) return map;
  const Shape3 s = map.shape();
  SpikeMap out({s.channels, s.height + 2 * padding, s.width + 2 * padding});
  for (int c = 0; c < s.channels; ++c)
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) out.set(c, y + padding, x + padding, map.at(c, y, x));
  return out;
}

ByteImage pad_image(const ByteImage& image, int padding) {
  if (padding == 0) return image;
  const Shape3 s = image.shape();
  ByteImage out({s.channels, s.height + 2 * padding, s.width + 2 * padding});
  for (int c = 0; c < s.channels; ++c)
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) out.set(c, y + padding, x + padding, image.at(c, y, x));
  return out;
}

SpikeMap flatten_map(const SpikeMap& map) {
  const Shape3 s = map.shape();
  SpikeMap flat({static_cast<int>(s.count()), 1, 1});
  for (int c = 0; c < s.channels; ++c)
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) flat.set(static_cast<int>(s.index(c, y, x)), 0, 0, map.at(c, y, x));
  return flat;
}

namespace {

Shape3 padded(Shape3 s, int p) { return {s.channels, s.height + 2 * p, s.width + 2 * p}; }

CycleReport scaled(CycleReport r, int times) {
  CycleReport out = r;
  out.total_cycles *= times;
  out.warmup_cycles *= times;
  out.steady_cycles *= times;
  out.accumulator_latency_cycles *= times;
  out.passes *= times;
  out.active_pe_cycles *= times;
  out.total_pe_cycles *= times;
  return out;
}

}  // namespace

EngineRun run_network_engine(const ModelBundle& bundle, const ByteImage& input, int time_steps,
                             const HardwareConfig& cfg) {
  if (time_steps <= 0) throw InvalidParameter("time steps must be positive");
  if (!(input.shape() == bundle.input)) {
    throw ShapeError("input " + input.shape().str() + " does not match network input " + bundle.input.str());
  }
  cfg.validate();
  bundle.check_consistency();
  const ValidatedNetwork net = bundle.validated();
  const FixedFormat& fmt = bundle.format;

  EngineRun run;
  run.total.pe_count = static_cast<std::uint64_t>(cfg.pe_count());
  run.total.clock_hz = cfg.clock_hz;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const AnnotatedLayer& layer = net.layers[li];
    const LayerParams& params = bundle.layers[li];
    SpikeTrain out(time_steps, layer.output);
    LayerCycles lc;
    lc.cycles.pe_count = run.total.pe_count;
    lc.cycles.clock_hz = cfg.clock_hz;
    switch (layer.spec.kind) {
      case LayerKind::kEncodingConv: {
        ConvSchedule conv = schedule_encoding_layer(pad_image(input, layer.spec.padding), params.weights, cfg);
        lc.cycles = conv.cycles;
        lc.boundary_peak_bytes = conv.boundary.peak_bytes;
        IfUnit unit(layer.output, fmt, IfMode::kEncodingIterate);
        unit.hold(std::move(conv.output));
        for (int t = 0; t < time_steps; ++t) out.set_step(t, unit.step(params.neurons));
        break;
      }
      case LayerKind::kConv:
      case LayerKind::kFullyConnected: {
        const SpikeTrain& prev = run.layer_outputs.back();
        IfUnit unit(layer.output, fmt, IfMode::kSpiking);
        for (int t = 0; t < time_steps; ++t) {
          const SpikeMap in = layer.flatten_input ? flatten_map(prev.step(t)) : prev.step(t);
          const ConvSchedule conv = schedule_conv_layer(pad_map(in, layer.spec.padding), params.weights, cfg);
          lc.cycles += conv.cycles;
          lc.boundary_peak_bytes = std::max(lc.boundary_peak_bytes, conv.boundary.peak_bytes);
          out.set_step(t, unit.step(params.neurons, &conv.output));
        }
        break;
      }
      case LayerKind::kMaxPool2: {
        const SpikeTrain& prev = run.layer_outputs.back();
        for (int t = 0; t < time_steps; ++t) out.set_step(t, maxpool2_oracle(prev.step(t)));
        break;
      }
    }
    run.total += lc.cycles;
    run.layers.push_back(lc);
    run.layer_outputs.push_back(std::move(out));
  }

  const SpikeTrain& last = run.layer_outputs.back();
  run.class_counts.assign(last.shape().count(), 0);
  for (int t = 0; t < time_steps; ++t) {
    const auto bits = last.step(t).bits();
    for (std::size_t i = 0; i < bits.size(); ++i) run.class_counts[i] += bits[i];
  }
  return run;
}

std::vector<CycleReport> estimate_network_cycles(const ValidatedNetwork& net, int time_steps,
                                                 const HardwareConfig& cfg) {
  if (time_steps <= 0) throw InvalidParameter("time steps must be positive");
  std::vector<CycleReport> out;
  for (const AnnotatedLayer& layer : net.layers) {
    CycleReport r;
    r.pe_count = static_cast<std::uint64_t>(cfg.pe_count());
    r.clock_hz = cfg.clock_hz;
    const LayerSpec& s = layer.spec;
    if (s.has_weights()) {
      const bool encoding = s.kind == LayerKind::kEncodingConv;
      const CycleReport once = estimate_conv_cycles(padded(layer.compute_input(), s.padding), s.out_channels,
                                                    s.kernel_h, s.kernel_w, encoding, cfg);
      r = encoding ? once : scaled(once, time_steps);
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace vsa::arch
