#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "vsa/fixed_point.hpp"

namespace vsa {

// Per-buffer on-chip SRAM sizes in bytes. Ping-pong buffers are listed per
// half. The defaults add up to 230.3125 KB; see README for the split.
struct SramCapacities {
  std::uint64_t spike_each = 24 * 1024;
  std::uint64_t weight_each = 73 * 1024 + 512;
  std::uint64_t membrane_each = 8 * 1024;
  std::uint64_t temp = 16 * 1024;
  std::uint64_t boundary = 3 * 1024 + 320;

  std::uint64_t total() const { return 2 * spike_each + 2 * weight_each + 2 * membrane_each + temp + boundary; }

  friend bool operator==(const SramCapacities&, const SramCapacities&) = default;
};

struct HardwareConfig {
  int pe_blocks = 32;
  int arrays_per_block = 3;  // max kernel width
  int array_rows = 8;        // input rows per tile (R)
  int array_cols = 3;        // max kernel height (K)
  double clock_hz = 5e8;
  int group_size = 32;       // input channels per accumulation pass
  int accumulator_stages = 3;
  int boundary_entry_bytes = 2;  // width of one stored partial sum
  FixedFormat format;
  SramCapacities sram;

  int pe_count() const { return pe_blocks * arrays_per_block * array_rows * array_cols; }
  int pes_per_block() const { return arrays_per_block * array_rows * array_cols; }

  // Throws ConfigError on inconsistent geometry.
  void validate() const;

  friend bool operator==(const HardwareConfig&, const HardwareConfig&) = default;
};

void to_json(nlohmann::json& j, const HardwareConfig& cfg);
// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, HardwareConfig& cfg);

HardwareConfig load_hardware_config(const std::string& path);

}  // namespace vsa
