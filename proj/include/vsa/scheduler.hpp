#pragma once

#include <cstdint>
#include <vector>

#include "vsa/hardware_config.hpp"
#include "vsa/tensor.hpp"

namespace vsa::arch {

struct CycleReport {
  std::uint64_t total_cycles = 0;   // warmup + steady
  std::uint64_t warmup_cycles = 0;
  std::uint64_t steady_cycles = 0;
  std::uint64_t accumulator_latency_cycles = 0;  // pipeline fill, not in total
  std::uint64_t passes = 0;
  std::uint64_t active_pe_cycles = 0;
  std::uint64_t total_pe_cycles = 0;
  std::uint64_t pe_count = 0;
  double clock_hz = 0.0;

  double utilization() const;
  // Active share of the steady-state cycles only.
  double steady_utilization() const;
  std::uint64_t achieved_ops() const { return 2 * active_pe_cycles; }
  double achieved_gops() const;
  double seconds() const;

  CycleReport& operator+=(const CycleReport& other);
  friend bool operator==(const CycleReport&, const CycleReport&) = default;
};

double peak_gops(const HardwareConfig& cfg);

// One output column vector as it leaves the adder tree, before stitching.
struct ColumnTrace {
  std::uint64_t cycle = 0;
  int out_channel = 0;
  int group = 0;
  int tile = 0;
  int column = 0;
  std::vector<std::int32_t> partial;  // R + K - 1 diagonal sums
};

struct BoundaryStats {
  std::uint64_t deposits = 0;
  std::size_t peak_entries = 0;
  std::size_t peak_values = 0;
  std::uint64_t peak_bytes = 0;
};

struct ConvSchedule {
  IntTensor output;
  CycleReport cycles;
  BoundaryStats boundary;
  std::vector<ColumnTrace> trace;
};

// Valid, stride-1 convolution of an already padded spike map on the PE
// blocks. Loop order: output channel, channel group, tile, column.
ConvSchedule schedule_conv_layer(const SpikeMap& padded_input, const BinaryWeightTensor& weights,
                                 const HardwareConfig& cfg, bool record_trace = false);

// Encoding layer: every input channel is split into 8 bitplanes on 8 PE
// blocks sharing one weight; stage 1 shifts each plane by its bit position.
ConvSchedule schedule_encoding_layer(const ByteImage& padded_input, const BinaryWeightTensor& weights,
                                     const HardwareConfig& cfg, bool record_trace = false);

// Same counts as the functional schedules, from shapes alone.
CycleReport estimate_conv_cycles(Shape3 padded_input, int out_channels, int kernel_h, int kernel_w, bool encoding,
                                 const HardwareConfig& cfg);

// Input channels that share one accumulation pass.
int channels_per_pass(const HardwareConfig& cfg, bool encoding);

}  // namespace vsa::arch
