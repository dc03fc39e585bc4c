#include "vsa/hardware_config.hpp"

#include <fstream>

#include "vsa/errors.hpp"

namespace vsa {

void HardwareConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(pe_blocks, "pe_blocks");
  positive(arrays_per_block, "arrays_per_block");
  positive(array_rows, "array_rows");
  positive(array_cols, "array_cols");
  positive(group_size, "group_size");
  positive(boundary_entry_bytes, "boundary_entry_bytes");
  if (accumulator_stages < 0) throw ConfigError("accumulator_stages must be non-negative");
  if (group_size > pe_blocks) throw ConfigError("group_size cannot exceed pe_blocks");
  if (array_rows > 32) throw ConfigError("array_rows above 32 is not supported");
  if (!(clock_hz > 0.0)) throw ConfigError("clock_hz must be positive");
  format.validate();
}

void to_json(nlohmann::json& j, const HardwareConfig& cfg) {
  j = nlohmann::json{
      {"pe_blocks", cfg.pe_blocks},
      {"arrays_per_block", cfg.arrays_per_block},
      {"array_rows", cfg.array_rows},
      {"array_cols", cfg.array_cols},
      {"clock_hz", cfg.clock_hz},
      {"group_size", cfg.group_size},
      {"accumulator_stages", cfg.accumulator_stages},
      {"boundary_entry_bytes", cfg.boundary_entry_bytes},
      {"fixed_total_bits", cfg.format.total_bits},
      {"fixed_frac_bits", cfg.format.frac_bits},
      {"sram",
       {{"spike_each", cfg.sram.spike_each},
        {"weight_each", cfg.sram.weight_each},
        {"membrane_each", cfg.sram.membrane_each},
        {"temp", cfg.sram.temp},
        {"boundary", cfg.sram.boundary}}},
  };
}

void from_json(const nlohmann::json& j, HardwareConfig& cfg) {
  if (!j.is_object()) throw ConfigError("hardware config must be a JSON object");
  auto get = [&](const nlohmann::json& obj, const char* key, auto& field) {
    if (obj.contains(key)) obj.at(key).get_to(field);
  };
  get(j, "pe_blocks", cfg.pe_blocks);
  get(j, "arrays_per_block", cfg.arrays_per_block);
  get(j, "array_rows", cfg.array_rows);
  get(j, "array_cols", cfg.array_cols);
  get(j, "clock_hz", cfg.clock_hz);
  get(j, "group_size", cfg.group_size);
  get(j, "accumulator_stages", cfg.accumulator_stages);
  get(j, "boundary_entry_bytes", cfg.boundary_entry_bytes);
  get(j, "fixed_total_bits", cfg.format.total_bits);
  get(j, "fixed_frac_bits", cfg.format.frac_bits);
  if (j.contains("sram")) {
    const auto& s = j.at("sram");
    get(s, "spike_each", cfg.sram.spike_each);
    get(s, "weight_each", cfg.sram.weight_each);
    get(s, "membrane_each", cfg.sram.membrane_each);
    get(s, "temp", cfg.sram.temp);
    get(s, "boundary", cfg.sram.boundary);
  }
}

HardwareConfig load_hardware_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open hardware config " + path);
  HardwareConfig cfg;
  try {
    from_json(nlohmann::json::parse(in), cfg);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid hardware config " + path + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace vsa
