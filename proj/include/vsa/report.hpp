#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vsa/scheduler.hpp"
#include "vsa/traffic.hpp"

namespace vsa {

struct LayerReport {
  int index = 0;
  std::string kind;
  std::string output;  // CxHxW
  arch::CycleReport cycles;
  std::uint64_t spikes = 0;
  std::uint64_t dram_bytes = 0;
};

struct FaultReport {
  std::string kind;
  std::string buffer;
  int stage = 0;
  std::string detail;

  friend bool operator==(const FaultReport&, const FaultReport&) = default;
};

struct RunReport {
  static constexpr int kSchema = 1;

  std::string network;
  std::string input;  // CxHxW
  int time_steps = 0;
  bool fusion = false;
  std::string bundle_checksum;  // hex, empty when no bundle was involved
  int pe_count = 0;
  double clock_hz = 0.0;
  std::vector<LayerReport> layers;
  arch::CycleReport totals;
  double peak_gops = 0.0;
  mem::TrafficLedger traffic;
  std::vector<std::vector<int>> fusion_groups;
  std::uint64_t buffer_dram_bytes = 0;
  std::vector<FaultReport> faults;
  std::vector<int> class_counts;
  std::optional<bool> oracle_match;   // only with --verify
  std::optional<std::string> timestamp;
};

nlohmann::json cycles_to_json(const arch::CycleReport& c);
arch::CycleReport cycles_from_json(const nlohmann::json& j);
nlohmann::json ledger_to_json(const mem::TrafficLedger& ledger);
mem::TrafficLedger ledger_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RunReport& report);
RunReport run_report_from_json(const nlohmann::json& j);

// Fixed header, one row per layer plus a totals row.
std::string to_csv(const RunReport& report);
std::string to_text(const RunReport& report);

// Traffic-only report for a ledger pair.
nlohmann::json traffic_to_json(const mem::TrafficComparison& cmp, const mem::FusionPlan& plan);
std::string traffic_to_text(const mem::TrafficComparison& cmp, const mem::FusionPlan& plan);
std::string traffic_to_csv(const mem::TrafficComparison& cmp);

std::string format_kb(std::uint64_t bytes);  // 1 KB = 1024 B, three decimals

}  // namespace vsa
