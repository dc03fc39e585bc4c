#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vsa/fixed_point.hpp"
#include "vsa/hardware_config.hpp"
#include "vsa/network.hpp"

namespace vsa::mem {

// 1 bit per spike, every time step.
std::uint64_t spike_map_bytes(Shape3 shape, int time_steps);

std::uint64_t weight_sign_bytes(const AnnotatedLayer& layer);
// Bias and threshold per output channel.
std::uint64_t param_bytes(const AnnotatedLayer& layer, const FixedFormat& format);
std::uint64_t weight_bytes(const AnnotatedLayer& layer, const FixedFormat& format);

// A layer with weights plus any pooling that follows it; pooling runs in the
// producer's post-processing, so stages are the unit of scheduling and fusion.
struct ComputeStage {
  int index = 0;              // position among stages
  int layer = 0;              // network layer index of the conv/fc
  std::vector<int> pools;     // network indices of absorbed MP2 layers
  Shape3 input;               // producer's map (the image for the encoding layer)
  Shape3 conv_output;         // before pooling
  Shape3 output;              // after pooling
  bool encoding = false;
  bool fully_connected = false;

  int last_layer() const { return pools.empty() ? layer : pools.back(); }
};

std::vector<ComputeStage> compute_stages(const ValidatedNetwork& net);

// Ordered groups of one or two adjacent stage indices.
struct FusionPlan {
  std::vector<std::vector<int>> groups;

  std::size_t fused_pairs() const;
  friend bool operator==(const FusionPlan&, const FusionPlan&) = default;
};

void to_json(nlohmann::json& j, const FusionPlan& plan);
void from_json(const nlohmann::json& j, FusionPlan& plan);

FusionPlan unfused_plan(const ValidatedNetwork& net);

// Greedy front-to-back pairing. A pair qualifies when neither stage is the
// encoding layer, each stage's weights fit one weight-SRAM half and one time
// step of the intermediate map fits the temp SRAM.
FusionPlan plan_fusion(const ValidatedNetwork& net, const HardwareConfig& cfg);

// Structural check (coverage, order, adjacency, group size) plus the
// combined-weight bound of fused pairs. Throws ConfigError.
void validate_plan(const FusionPlan& plan, const ValidatedNetwork& net, const HardwareConfig& cfg);

FusionPlan load_fusion_plan(const std::filesystem::path& path);

struct LayerTraffic {
  int stage = 0;
  std::string name;
  bool encoding = false;
  bool fully_connected = false;
  bool classifier = false;        // last stage of the network
  std::uint64_t weight_sign_bytes = 0;
  std::uint64_t param_bytes = 0;
  std::uint64_t input_bytes = 0;  // image or spike maps read from DRAM
  std::uint64_t output_bytes = 0; // spike maps written to DRAM
  bool input_on_chip = false;     // fed by the fused producer
  bool output_on_chip = false;    // consumed by the fused successor

  std::uint64_t total() const { return weight_sign_bytes + param_bytes + input_bytes + output_bytes; }
};

struct TrafficItem {
  std::string name;
  std::uint64_t bytes = 0;
};

struct TrafficLedger {
  int time_steps = 0;
  bool tick_batching = true;
  bool layer_fusion = false;
  std::vector<LayerTraffic> layers;

  std::uint64_t total() const;
  // Named lines that sum to total().
  std::vector<TrafficItem> items() const;
  // Spike-only view: total minus fc weights, folded parameters and the
  // classifier's own spike input and output.
  std::uint64_t spike_view() const;
};

TrafficLedger simulate_traffic(const ValidatedNetwork& net, const FusionPlan& plan, int time_steps,
                               const FixedFormat& format, bool tick_batching = true);

struct TrafficComparison {
  TrafficLedger unfused;
  TrafficLedger fused;
  std::uint64_t savings = 0;            // unfused.total() - fused.total()
  std::uint64_t identity_savings = 0;   // sum of 2 x fused intermediate maps

  double percent_reduction() const;
  double spike_view_percent_reduction() const;
};

TrafficComparison compare_traffic(const ValidatedNetwork& net, const FusionPlan& plan, int time_steps,
                                  const FixedFormat& format);

}  // namespace vsa::mem
