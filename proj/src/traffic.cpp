#include "vsa/traffic.hpp"

#include <fstream>

#include "vsa/errors.hpp"

namespace vsa::mem {

std::uint64_t spike_map_bytes(Shape3 shape, int time_steps) {
  if (time_steps < 0) throw InvalidParameter("time steps must be non-negative");
  return (shape.count() + 7) / 8 * static_cast<std::uint64_t>(time_steps);
}

std::uint64_t weight_sign_bytes(const AnnotatedLayer& layer) {
  if (!layer.spec.has_weights()) return 0;
  const std::uint64_t n = static_cast<std::uint64_t>(layer.spec.out_channels) * layer.compute_input().channels *
                          layer.spec.kernel_h * layer.spec.kernel_w;
  return (n + 7) / 8;
}

std::uint64_t param_bytes(const AnnotatedLayer& layer, const FixedFormat& format) {
  if (!layer.spec.has_weights()) return 0;
  return static_cast<std::uint64_t>(layer.spec.out_channels) * 2 * format.storage_bytes();
}

std::uint64_t weight_bytes(const AnnotatedLayer& layer, const FixedFormat& format) {
  return weight_sign_bytes(layer) + param_bytes(layer, format);
}

std::vector<ComputeStage> compute_stages(const ValidatedNetwork& net) {
  std::vector<ComputeStage> stages;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const AnnotatedLayer& l = net.layers[i];
    if (l.spec.kind == LayerKind::kMaxPool2) {
      if (stages.empty()) throw ShapeError("pooling before the first conv layer");
      stages.back().pools.push_back(static_cast<int>(i));
      stages.back().output = l.output;
      continue;
    }
    ComputeStage s;
    s.index = static_cast<int>(stages.size());
    s.layer = static_cast<int>(i);
    s.input = l.input;
    s.conv_output = l.output;
    s.output = l.output;
    s.encoding = l.spec.kind == LayerKind::kEncodingConv;
    s.fully_connected = l.spec.kind == LayerKind::kFullyConnected;
    stages.push_back(s);
  }
  return stages;
}

std::size_t FusionPlan::fused_pairs() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size() == 2;
  return n;
}

void to_json(nlohmann::json& j, const FusionPlan& plan) { j = nlohmann::json{{"groups", plan.groups}}; }

void from_json(const nlohmann::json& j, FusionPlan& plan) {
  if (!j.is_object() || !j.contains("groups")) throw ConfigError("fusion plan needs a \"groups\" array");
  try {
    j.at("groups").get_to(plan.groups);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("fusion plan groups must be arrays of integers: ") + e.what());
  }
}

FusionPlan unfused_plan(const ValidatedNetwork& net) {
  FusionPlan plan;
  for (const ComputeStage& s : compute_stages(net)) plan.groups.push_back({s.index});
  return plan;
}

namespace {

std::uint64_t stage_weight_bytes(const ValidatedNetwork& net, const ComputeStage& s, const FixedFormat& fmt) {
  return weight_bytes(net.layers[static_cast<std::size_t>(s.layer)], fmt);
}

std::string stage_name(const ValidatedNetwork& net, const ComputeStage& s) {
  const LayerSpec& spec = net.layers[static_cast<std::size_t>(s.layer)].spec;
  std::string name = std::to_string(spec.out_channels);
  name += spec.kind == LayerKind::kEncodingConv ? "Conv(encoding)"
          : spec.kind == LayerKind::kFullyConnected ? "fc"
                                                     : "Conv";
  for (std::size_t i = 0; i < s.pools.size(); ++i) name += "-MP2";
  return name;
}

}  // namespace

FusionPlan plan_fusion(const ValidatedNetwork& net, const HardwareConfig& cfg) {
  const std::vector<ComputeStage> stages = compute_stages(net);
  auto fits = [&](const ComputeStage& s) {
    return !s.encoding && stage_weight_bytes(net, s, cfg.format) <= cfg.sram.weight_each;
  };
  FusionPlan plan;
  std::size_t i = 0;
  while (i < stages.size()) {
    if (i + 1 < stages.size() && fits(stages[i]) && fits(stages[i + 1]) &&
        spike_map_bytes(stages[i].output, 1) <= cfg.sram.temp) {
      plan.groups.push_back({static_cast<int>(i), static_cast<int>(i + 1)});
      i += 2;
    } else {
      plan.groups.push_back({static_cast<int>(i)});
      i += 1;
    }
  }
  return plan;
}

void validate_plan(const FusionPlan& plan, const ValidatedNetwork& net, const HardwareConfig& cfg) {
  const std::vector<ComputeStage> stages = compute_stages(net);
  int expected = 0;
  for (std::size_t g = 0; g < plan.groups.size(); ++g) {
    const auto& group = plan.groups[g];
    if (group.empty() || group.size() > 2) {
      throw ConfigError("fusion group " + std::to_string(g) + " must hold one or two layers");
    }
    for (int idx : group) {
      if (idx != expected) {
        throw ConfigError("fusion group " + std::to_string(g) + " lists layer " + std::to_string(idx) +
                          ", expected " + std::to_string(expected) + " (groups must cover layers in order)");
      }
      ++expected;
    }
    if (group.size() == 2) {
      const std::uint64_t w = stage_weight_bytes(net, stages[static_cast<std::size_t>(group[0])], cfg.format) +
                              stage_weight_bytes(net, stages[static_cast<std::size_t>(group[1])], cfg.format);
      if (w > 2 * cfg.sram.weight_each) {
        throw ConfigError("fused layers " + std::to_string(group[0]) + " and " + std::to_string(group[1]) +
                          " need " + std::to_string(w) + " weight bytes, the weight SRAM holds " +
                          std::to_string(2 * cfg.sram.weight_each));
      }
    }
  }
  if (expected != static_cast<int>(stages.size())) {
    throw ConfigError("fusion plan covers " + std::to_string(expected) + " of " + std::to_string(stages.size()) +
                      " layers");
  }
}

FusionPlan load_fusion_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open fusion plan " + path.string());
  FusionPlan plan;
  try {
    from_json(nlohmann::json::parse(in), plan);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid fusion plan " + path.string() + ": " + e.what());
  }
  return plan;
}

std::uint64_t TrafficLedger::total() const {
  std::uint64_t t = 0;
  for (const auto& l : layers) t += l.total();
  return t;
}

std::vector<TrafficItem> TrafficLedger::items() const {
  TrafficItem conv{"conv weight sign bits", 0}, fc{"fc weight sign bits", 0}, params{"folded parameters", 0},
      image{"input image", 0}, reads{"spike map reads", 0}, writes{"spike map writes", 0};
  for (const auto& l : layers) {
    (l.fully_connected ? fc : conv).bytes += l.weight_sign_bytes;
    params.bytes += l.param_bytes;
    (l.encoding ? image : reads).bytes += l.input_bytes;
    writes.bytes += l.output_bytes;
  }
  return {conv, fc, params, image, reads, writes};
}

std::uint64_t TrafficLedger::spike_view() const {
  std::uint64_t t = total();
  for (const auto& l : layers) {
    t -= l.param_bytes;
    if (l.fully_connected) t -= l.weight_sign_bytes;
    if (l.classifier) t -= l.input_bytes + l.output_bytes;
  }
  return t;
}

TrafficLedger simulate_traffic(const ValidatedNetwork& net, const FusionPlan& plan, int time_steps,
                               const FixedFormat& format, bool tick_batching) {
  if (time_steps <= 0) throw InvalidParameter("time steps must be positive");
  const std::vector<ComputeStage> stages = compute_stages(net);
  std::vector<bool> on_chip_in(stages.size(), false), on_chip_out(stages.size(), false);
  int covered = 0;
  for (const auto& g : plan.groups) {
    for (int idx : g) {
      if (idx != covered) throw ConfigError("fusion plan does not match the network layers");
      ++covered;
    }
    if (g.size() == 2) {
      on_chip_out[static_cast<std::size_t>(g[0])] = true;
      on_chip_in[static_cast<std::size_t>(g[1])] = true;
    } else if (g.size() != 1) {
      throw ConfigError("fusion groups hold one or two layers");
    }
  }
  if (covered != static_cast<int>(stages.size())) throw ConfigError("fusion plan does not cover the network");

  TrafficLedger ledger;
  ledger.time_steps = time_steps;
  ledger.tick_batching = tick_batching;
  ledger.layer_fusion = plan.fused_pairs() > 0;
  const std::uint64_t weight_visits = tick_batching ? 1 : static_cast<std::uint64_t>(time_steps);
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const ComputeStage& s = stages[i];
    const AnnotatedLayer& layer = net.layers[static_cast<std::size_t>(s.layer)];
    LayerTraffic t;
    t.stage = s.index;
    t.name = stage_name(net, s);
    t.encoding = s.encoding;
    t.fully_connected = s.fully_connected;
    t.classifier = i + 1 == stages.size();
    t.weight_sign_bytes = weight_sign_bytes(layer) * weight_visits;
    t.param_bytes = param_bytes(layer, format) * weight_visits;
    t.input_on_chip = on_chip_in[i];
    t.output_on_chip = on_chip_out[i];
    if (s.encoding) {
      t.input_bytes = s.input.count();
    } else if (!t.input_on_chip) {
      t.input_bytes = spike_map_bytes(s.input, time_steps);
    }
    if (!t.output_on_chip) t.output_bytes = spike_map_bytes(s.output, time_steps);
    ledger.layers.push_back(t);
  }
  return ledger;
}

double TrafficComparison::percent_reduction() const {
  return unfused.total() ? 100.0 * static_cast<double>(savings) / static_cast<double>(unfused.total()) : 0.0;
}

double TrafficComparison::spike_view_percent_reduction() const {
  const std::uint64_t base = unfused.spike_view();
  return base ? 100.0 * static_cast<double>(base - fused.spike_view()) / static_cast<double>(base) : 0.0;
}

TrafficComparison compare_traffic(const ValidatedNetwork& net, const FusionPlan& plan, int time_steps,
                                  const FixedFormat& format) {
  TrafficComparison c;
  c.unfused = simulate_traffic(net, unfused_plan(net), time_steps, format);
  c.fused = simulate_traffic(net, plan, time_steps, format);
  c.savings = c.unfused.total() - c.fused.total();
  const std::vector<ComputeStage> stages = compute_stages(net);
  for (const auto& g : plan.groups) {
    if (g.size() == 2) c.identity_savings += 2 * spike_map_bytes(stages[static_cast<std::size_t>(g[0])].output, time_steps);
  }
  return c;
}

}  // namespace vsa::mem
