#include "vsa/report.hpp"

#include <cstdio>
#include <sstream>

#include "vsa/errors.hpp"

namespace vsa {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_kb(std::uint64_t bytes) { return fixed(static_cast<double>(bytes) / 1024.0, 3); }

nlohmann::json cycles_to_json(const arch::CycleReport& c) {
  return {
      {"total_cycles", c.total_cycles},
      {"warmup_cycles", c.warmup_cycles},
      {"steady_cycles", c.steady_cycles},
      {"accumulator_latency_cycles", c.accumulator_latency_cycles},
      {"passes", c.passes},
      {"active_pe_cycles", c.active_pe_cycles},
      {"total_pe_cycles", c.total_pe_cycles},
      {"pe_count", c.pe_count},
      {"clock_hz", c.clock_hz},
      {"utilization", c.utilization()},
      {"steady_utilization", c.steady_utilization()},
      {"achieved_ops", c.achieved_ops()},
      {"achieved_gops", c.achieved_gops()},
  };
}

arch::CycleReport cycles_from_json(const nlohmann::json& j) {
  arch::CycleReport c;
  j.at("total_cycles").get_to(c.total_cycles);
  j.at("warmup_cycles").get_to(c.warmup_cycles);
  j.at("steady_cycles").get_to(c.steady_cycles);
  j.at("accumulator_latency_cycles").get_to(c.accumulator_latency_cycles);
  j.at("passes").get_to(c.passes);
  j.at("active_pe_cycles").get_to(c.active_pe_cycles);
  j.at("total_pe_cycles").get_to(c.total_pe_cycles);
  j.at("pe_count").get_to(c.pe_count);
  j.at("clock_hz").get_to(c.clock_hz);
  return c;
}

nlohmann::json ledger_to_json(const mem::TrafficLedger& ledger) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : ledger.layers) {
    layers.push_back({
        {"stage", l.stage},
        {"name", l.name},
        {"encoding", l.encoding},
        {"fully_connected", l.fully_connected},
        {"classifier", l.classifier},
        {"weight_sign_bytes", l.weight_sign_bytes},
        {"param_bytes", l.param_bytes},
        {"input_bytes", l.input_bytes},
        {"output_bytes", l.output_bytes},
        {"input_on_chip", l.input_on_chip},
        {"output_on_chip", l.output_on_chip},
    });
  }
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : ledger.items()) items.push_back({{"name", item.name}, {"bytes", item.bytes}});
  return {
      {"time_steps", ledger.time_steps},
      {"tick_batching", ledger.tick_batching},
      {"layer_fusion", ledger.layer_fusion},
      {"layers", layers},
      {"items", items},
      {"total_bytes", ledger.total()},
      {"spike_view_bytes", ledger.spike_view()},
  };
}

mem::TrafficLedger ledger_from_json(const nlohmann::json& j) {
  mem::TrafficLedger ledger;
  j.at("time_steps").get_to(ledger.time_steps);
  j.at("tick_batching").get_to(ledger.tick_batching);
  j.at("layer_fusion").get_to(ledger.layer_fusion);
  for (const auto& l : j.at("layers")) {
    mem::LayerTraffic t;
    l.at("stage").get_to(t.stage);
    l.at("name").get_to(t.name);
    l.at("encoding").get_to(t.encoding);
    l.at("fully_connected").get_to(t.fully_connected);
    l.at("classifier").get_to(t.classifier);
    l.at("weight_sign_bytes").get_to(t.weight_sign_bytes);
    l.at("param_bytes").get_to(t.param_bytes);
    l.at("input_bytes").get_to(t.input_bytes);
    l.at("output_bytes").get_to(t.output_bytes);
    l.at("input_on_chip").get_to(t.input_on_chip);
    l.at("output_on_chip").get_to(t.output_on_chip);
    ledger.layers.push_back(t);
  }
  return ledger;
}

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : r.layers) {
    layers.push_back({
        {"index", l.index},
        {"kind", l.kind},
        {"output", l.output},
        {"cycles", cycles_to_json(l.cycles)},
        {"spikes", l.spikes},
        {"dram_bytes", l.dram_bytes},
    });
  }
  nlohmann::json faults = nlohmann::json::array();
  for (const auto& f : r.faults) {
    faults.push_back({{"kind", f.kind}, {"buffer", f.buffer}, {"stage", f.stage}, {"detail", f.detail}});
  }
  nlohmann::json j = {
      {"schema", RunReport::kSchema},
      {"network", r.network},
      {"input", r.input},
      {"time_steps", r.time_steps},
      {"fusion", r.fusion},
      {"bundle_checksum", r.bundle_checksum},
      {"hardware", {{"pe_count", r.pe_count}, {"clock_hz", r.clock_hz}, {"peak_gops", r.peak_gops}}},
      {"layers", layers},
      {"totals", cycles_to_json(r.totals)},
      {"traffic", ledger_to_json(r.traffic)},
      {"fusion_groups", r.fusion_groups},
      {"buffers", {{"dram_bytes", r.buffer_dram_bytes}, {"faults", faults}}},
      {"class_counts", r.class_counts},
  };
  if (r.oracle_match) j["oracle_match"] = *r.oracle_match;
  if (r.timestamp) j["timestamp"] = *r.timestamp;
  return j;
}

RunReport run_report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<int>() != RunReport::kSchema) throw ConfigError("unsupported report schema");
    RunReport r;
    j.at("network").get_to(r.network);
    j.at("input").get_to(r.input);
    j.at("time_steps").get_to(r.time_steps);
    j.at("fusion").get_to(r.fusion);
    j.at("bundle_checksum").get_to(r.bundle_checksum);
    const auto& hw = j.at("hardware");
    hw.at("pe_count").get_to(r.pe_count);
    hw.at("clock_hz").get_to(r.clock_hz);
    hw.at("peak_gops").get_to(r.peak_gops);
    for (const auto& l : j.at("layers")) {
      LayerReport lr;
      l.at("index").get_to(lr.index);
      l.at("kind").get_to(lr.kind);
      l.at("output").get_to(lr.output);
      lr.cycles = cycles_from_json(l.at("cycles"));
      l.at("spikes").get_to(lr.spikes);
      l.at("dram_bytes").get_to(lr.dram_bytes);
      r.layers.push_back(lr);
    }
    r.totals = cycles_from_json(j.at("totals"));
    r.traffic = ledger_from_json(j.at("traffic"));
    j.at("fusion_groups").get_to(r.fusion_groups);
    j.at("buffers").at("dram_bytes").get_to(r.buffer_dram_bytes);
    for (const auto& f : j.at("buffers").at("faults")) {
      r.faults.push_back({f.at("kind").get<std::string>(), f.at("buffer").get<std::string>(), f.at("stage").get<int>(),
                          f.at("detail").get<std::string>()});
    }
    j.at("class_counts").get_to(r.class_counts);
    if (j.contains("oracle_match")) r.oracle_match = j.at("oracle_match").get<bool>();
    if (j.contains("timestamp")) r.timestamp = j.at("timestamp").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed run report: ") + e.what());
  }
}

std::string to_csv(const RunReport& r) {
  std::ostringstream out;
  out << "layer,kind,output,total_cycles,warmup_cycles,active_pe_cycles,utilization,achieved_gops,spikes,dram_bytes\n";
  std::uint64_t spikes = 0, dram = 0;
  for (const auto& l : r.layers) {
    out << l.index << ',' << csv_field(l.kind) << ',' << l.output << ',' << l.cycles.total_cycles << ','
        << l.cycles.warmup_cycles << ',' << l.cycles.active_pe_cycles << ',' << fixed(l.cycles.utilization(), 6) << ','
        << fixed(l.cycles.achieved_gops(), 3) << ',' << l.spikes << ',' << l.dram_bytes << '\n';
    spikes += l.spikes;
    dram += l.dram_bytes;
  }
  out << "total,,," << r.totals.total_cycles << ',' << r.totals.warmup_cycles << ',' << r.totals.active_pe_cycles << ','
      << fixed(r.totals.utilization(), 6) << ',' << fixed(r.totals.achieved_gops(), 3) << ',' << spikes << ',' << dram
      << '\n';
  return out.str();
}

std::string to_text(const RunReport& r) {
  std::ostringstream out;
  out << "network      " << r.network << "\n";
  out << "input        " << r.input << ", T=" << r.time_steps << ", fusion " << (r.fusion ? "on" : "off") << "\n";
  if (!r.bundle_checksum.empty()) out << "bundle crc32 " << r.bundle_checksum << "\n";
  out << "hardware     " << r.pe_count << " PEs at " << fixed(r.clock_hz / 1e6, 1) << " MHz, peak "
      << fixed(r.peak_gops, 1) << " GOPS\n\n";
  out << "  #  layer                 output        cycles    util  spikes\n";
  for (const auto& l : r.layers) {
    char line[160];
    std::snprintf(line, sizeof line, "%3d  %-20s  %-12s %9llu  %6.4f  %llu\n", l.index, l.kind.c_str(),
                  l.output.c_str(), static_cast<unsigned long long>(l.cycles.total_cycles), l.cycles.utilization(),
                  static_cast<unsigned long long>(l.spikes));
    out << line;
  }
  out << "\ncycles       " << r.totals.total_cycles << " (" << r.totals.warmup_cycles << " warmup, "
      << r.totals.accumulator_latency_cycles << " accumulator latency not included)\n";
  out << "utilization  " << fixed(r.totals.utilization(), 4) << " (steady state " << fixed(r.totals.steady_utilization(), 4)
      << ")\n";
  out << "achieved     " << fixed(r.totals.achieved_gops(), 3) << " GOPS\n";
  out << "DRAM traffic " << r.traffic.total() << " B (" << format_kb(r.traffic.total()) << " KB)\n";
  for (const auto& item : r.traffic.items()) {
    out << "  " << item.name << ": " << item.bytes << " B\n";
  }
  out << "buffer trace " << r.buffer_dram_bytes << " B DRAM, " << r.faults.size() << " fault(s)\n";
  for (const auto& f : r.faults) out << "  " << f.kind << " in " << f.buffer << " (stage " << f.stage << "): " << f.detail << "\n";
  out << "class counts";
  for (int c : r.class_counts) out << ' ' << c;
  out << "\n";
  if (r.oracle_match) out << "oracle match " << (*r.oracle_match ? "yes" : "NO") << "\n";
  if (r.timestamp) out << "generated    " << *r.timestamp << "\n";
  return out.str();
}

nlohmann::json traffic_to_json(const mem::TrafficComparison& cmp, const mem::FusionPlan& plan) {
  return {
      {"schema", RunReport::kSchema},
      {"fusion_groups", plan.groups},
      {"unfused", ledger_to_json(cmp.unfused)},
      {"fused", ledger_to_json(cmp.fused)},
      {"savings_bytes", cmp.savings},
      {"identity_savings_bytes", cmp.identity_savings},
      {"percent_reduction", cmp.percent_reduction()},
      {"spike_view_percent_reduction", cmp.spike_view_percent_reduction()},
  };
}

std::string traffic_to_text(const mem::TrafficComparison& cmp, const mem::FusionPlan& plan) {
  std::ostringstream out;
  out << "fusion plan  ";
  for (const auto& g : plan.groups) {
    out << '[';
    for (std::size_t i = 0; i < g.size(); ++i) out << (i ? "," : "") << g[i];
    out << ']';
  }
  out << "\n\n";
  out << "  #  layer                  weights     params      input     output   (unfused | fused)\n";
  for (std::size_t i = 0; i < cmp.unfused.layers.size(); ++i) {
    const auto& u = cmp.unfused.layers[i];
    const auto& f = cmp.fused.layers[i];
    char line[200];
    std::snprintf(line, sizeof line, "%3d  %-20s %9llu %9llu %10llu %10llu   %10llu | %llu\n", u.stage, u.name.c_str(),
                  static_cast<unsigned long long>(u.weight_sign_bytes), static_cast<unsigned long long>(u.param_bytes),
                  static_cast<unsigned long long>(u.input_bytes), static_cast<unsigned long long>(u.output_bytes),
                  static_cast<unsigned long long>(u.total()), static_cast<unsigned long long>(f.total()));
    out << line;
  }
  out << "\nitemized totals (bytes)        unfused        fused\n";
  const auto ui = cmp.unfused.items();
  const auto fi = cmp.fused.items();
  for (std::size_t i = 0; i < ui.size(); ++i) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-26s %12llu %12llu\n", ui[i].name.c_str(),
                  static_cast<unsigned long long>(ui[i].bytes), static_cast<unsigned long long>(fi[i].bytes));
    out << line;
  }
  out << "  total                      " << cmp.unfused.total() << " B (" << format_kb(cmp.unfused.total())
      << " KB) -> " << cmp.fused.total() << " B (" << format_kb(cmp.fused.total()) << " KB)\n";
  out << "savings      " << cmp.savings << " B (" << format_kb(cmp.savings) << " KB), sum of 2 x fused maps "
      << cmp.identity_savings << " B\n";
  out << "reduction    " << fixed(cmp.percent_reduction(), 2) << "% of all DRAM traffic (reference figure 35.3%)\n";
  out << "spike view   " << format_kb(cmp.unfused.spike_view()) << " KB -> " << format_kb(cmp.fused.spike_view())
      << " KB, " << fixed(cmp.spike_view_percent_reduction(), 2)
      << "% (excludes fc weights, folded parameters and classifier spike I/O)\n";
  return out.str();
}

std::string traffic_to_csv(const mem::TrafficComparison& cmp) {
  std::ostringstream out;
  out << "stage,name,weight_sign_bytes,param_bytes,input_bytes,output_bytes,unfused_bytes,fused_bytes\n";
  for (std::size_t i = 0; i < cmp.unfused.layers.size(); ++i) {
    const auto& u = cmp.unfused.layers[i];
    out << u.stage << ',' << csv_field(u.name) << ',' << u.weight_sign_bytes << ',' << u.param_bytes << ','
        << u.input_bytes << ',' << u.output_bytes << ',' << u.total() << ',' << cmp.fused.layers[i].total() << '\n';
  }
  out << "total,,,,,," << cmp.unfused.total() << ',' << cmp.fused.total() << '\n';
  return out.str();
}

}  // namespace vsa
