#pragma once

#include <vector>

#include "vsa/bundle.hpp"
#include "vsa/hardware_config.hpp"
#include "vsa/scheduler.hpp"
#include "vsa/tensor.hpp"

namespace vsa::arch {

SpikeMap pad_map(const SpikeMap& map, int padding);
ByteImage pad_image(const ByteImage& image, int padding);
// [C][H][W] -> [C*H*W][1][1], row-major.
SpikeMap flatten_map(const SpikeMap& map);

struct LayerCycles {
  CycleReport cycles;          // all time steps of the layer
  std::uint64_t boundary_peak_bytes = 0;
};

struct EngineRun {
  std::vector<SpikeTrain> layer_outputs;
  std::vector<LayerCycles> layers;
  std::vector<int> class_counts;
  CycleReport total;
};

// Runs every layer through the PE-array schedules and the IF unit, all time
// steps of a layer before the next. Pooling is OR-reduced in post-processing
// and costs no PE cycles.
EngineRun run_network_engine(const ModelBundle& bundle, const ByteImage& input, int time_steps,
                             const HardwareConfig& cfg);

// Analytic per-layer cycle counts for a network, without the functional run.
std::vector<CycleReport> estimate_network_cycles(const ValidatedNetwork& net, int time_steps,
                                                 const HardwareConfig& cfg);

}  // namespace vsa::arch
