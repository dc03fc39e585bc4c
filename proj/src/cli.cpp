#include "vsa/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "vsa/buffers.hpp"
#include "vsa/bundle.hpp"
#include "vsa/engine.hpp"
#include "vsa/errors.hpp"
#include "vsa/hardware_config.hpp"
#include "vsa/network.hpp"
#include "vsa/reference.hpp"
#include "vsa/report.hpp"
#include "vsa/traffic.hpp"

namespace vsa::cli {

namespace {

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  1  internal error\n"
    "  2  argument error\n"
    "  3  validation error (network, shapes, config, fusion plan)\n"
    "  4  SRAM capacity fault or fixed-point overflow\n"
    "  5  engine spikes differ from the reference (--verify)\n"
    "  6  I/O or bundle error";

struct RunArgs {
  std::string net;
  std::string input_shape;
  std::string bundle;
  std::string input;
  std::string config;
  std::uint64_t seed = 0;
  int timesteps = 8;
  std::string fusion = "off";
  std::string fusion_plan;
  bool verify = false;
  bool cycles_only = false;
  bool deterministic = false;
  std::string report = "text";
  std::string out;
};

struct TrafficArgs {
  std::string net;
  std::string input_shape;
  std::string config;
  int timesteps = 8;
  std::string plan = "auto";
  std::string report = "text";
  std::string out;
};

struct BenchArgs {
  std::string config;
  int timesteps = 8;
  std::string report = "text";
  std::string out;
};

struct GenArgs {
  std::string net;
  std::string input_shape;
  std::string config;
  std::uint64_t seed = 0;
  std::string bundle;
  std::string input;
};

struct NetSource {
  NetworkDescription net;
  std::optional<Shape3> input;
};

Shape3 parse_shape(const std::string& text) {
  Shape3 s;
  char x1 = 0, x2 = 0;
  std::istringstream in(text);
  if (!(in >> s.channels >> x1 >> s.height >> x2 >> s.width) || x1 != 'x' || x2 != 'x' || !s.positive() ||
      in.peek() != EOF) {
    throw InvalidParameter("input shape must look like CxHxW, got '" + text + "'");
  }
  return s;
}

// A preset name, a file holding the grammar, or the grammar itself.
NetSource resolve_network(const std::string& arg, const std::string& shape) {
  NetSource src;
  if (const auto preset = find_preset(arg)) {
    src.net = parse_network(preset->text);
    src.input = preset->input;
  } else if (std::filesystem::is_regular_file(arg)) {
    std::ifstream in(arg);
    std::stringstream text;
    text << in.rdbuf();
    src.net = parse_network(text.str());
  } else {
    src.net = parse_network(arg);
  }
  if (!shape.empty()) src.input = parse_shape(shape);
  return src;
}

HardwareConfig load_config(const std::string& path) {
  if (path.empty()) return HardwareConfig{};
  return load_hardware_config(path);
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw IoError("cannot write " + path);
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

std::string render(const RunReport& r, const std::string& format) {
  if (format == "json") return to_json(r).dump(2) + "\n";
  if (format == "csv") return to_csv(r);
  return to_text(r);
}

mem::FusionPlan choose_plan(const std::string& fusion, const std::string& plan_file, const ValidatedNetwork& net,
                            const HardwareConfig& cfg) {
  mem::FusionPlan plan;
  if (!plan_file.empty() && plan_file != "auto") {
    plan = plan_file == "none" ? mem::unfused_plan(net) : mem::load_fusion_plan(plan_file);
  } else if (fusion == "on" || plan_file == "auto") {
    plan = mem::plan_fusion(net, cfg);
  } else {
    plan = mem::unfused_plan(net);
  }
  mem::validate_plan(plan, net, cfg);
  return plan;
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  HardwareConfig cfg = load_config(a.config);
  if (a.cycles_only && a.verify) throw InvalidParameter("--verify needs the functional simulation, drop --cycles-only");

  std::optional<ByteImage> image;
  if (!a.input.empty()) image = load_input(a.input);

  ModelBundle bundle;
  if (!a.bundle.empty()) {
    bundle = load_bundle(a.bundle);
    if (!a.net.empty()) {
      const NetSource src = resolve_network(a.net, a.input_shape);
      if (print_network(src.net) != print_network(bundle.network) || (src.input && !(*src.input == bundle.input))) {
        throw ConfigError("--net " + a.net + " does not match the bundle's network " + print_network(bundle.network) +
                          " on " + bundle.input.str());
      }
    }
  } else {
    if (a.net.empty()) throw InvalidParameter("run needs --net or --bundle");
    const NetSource src = resolve_network(a.net, a.input_shape);
    const std::optional<Shape3> shape = src.input ? src.input : image ? std::optional(image->shape()) : std::nullopt;
    if (!shape) throw InvalidParameter("cannot tell the input shape of " + a.net + "; pass --input-shape CxHxW");
    RandomBundleOptions options;
    options.format = cfg.format;
    bundle = generate_random_bundle(src.net, *shape, a.seed, options);
  }
  if (!image) image = generate_random_image(bundle.input, a.seed);
  cfg.format = bundle.format;
  cfg.validate();
  bundle.check_consistency();
  const ValidatedNetwork net = bundle.validated();
  const int T = a.timesteps;

  RunReport report;
  report.network = print_network(bundle.network);
  report.input = bundle.input.str();
  report.time_steps = T;
  report.bundle_checksum = hex32(bundle.checksum());
  report.pe_count = cfg.pe_count();
  report.clock_hz = cfg.clock_hz;
  report.peak_gops = arch::peak_gops(cfg);

  std::vector<arch::CycleReport> layer_cycles;
  std::optional<arch::EngineRun> engine;
  std::optional<NetworkRun> oracle;
  if (a.cycles_only) {
    layer_cycles = arch::estimate_network_cycles(net, T, cfg);
  } else {
    engine = arch::run_network_engine(bundle, *image, T, cfg);
    for (const auto& l : engine->layers) layer_cycles.push_back(l.cycles);
    report.class_counts = engine->class_counts;
  }
  if (a.verify) {
    oracle = run_network_oracle(bundle, *image, T);
    report.oracle_match = oracle->layer_outputs == engine->layer_outputs && oracle->class_counts == engine->class_counts;
  }

  const mem::FusionPlan plan = choose_plan(a.fusion, a.fusion_plan, net, cfg);
  report.fusion = plan.fused_pairs() > 0;
  report.fusion_groups = plan.groups;
  report.traffic = mem::simulate_traffic(net, plan, T, cfg.format);

  mem::PingPongOptions po;
  po.record_events = false;
  if (engine) {
    po.produced = &engine->layer_outputs;
    po.expected = oracle ? &oracle->layer_outputs : &engine->layer_outputs;
  }
  const mem::PingPongTrace trace = mem::pingpong_schedule(net, plan, T, cfg, po);
  report.buffer_dram_bytes = trace.dram_total();
  for (const auto& f : trace.faults) {
    report.faults.push_back({mem::to_string(f.kind), mem::to_string(f.buffer), f.stage, f.detail});
  }

  const std::vector<mem::ComputeStage> stages = mem::compute_stages(net);
  report.totals.pe_count = static_cast<std::uint64_t>(cfg.pe_count());
  report.totals.clock_hz = cfg.clock_hz;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    LayerReport lr;
    lr.index = static_cast<int>(i);
    lr.kind = to_string(net.layers[i].spec.kind);
    lr.output = net.layers[i].output.str();
    lr.cycles = layer_cycles[i];
    if (engine) lr.spikes = engine->layer_outputs[i].popcount();
    for (const auto& s : stages) {
      if (s.layer == static_cast<int>(i)) lr.dram_bytes = report.traffic.layers[static_cast<std::size_t>(s.index)].total();
    }
    report.totals += lr.cycles;
    report.layers.push_back(lr);
  }
  if (!a.deterministic) report.timestamp = utc_now();

  emit(render(report, a.report), a.out, out);

  if (report.oracle_match && !*report.oracle_match) {
    err << "error: engine spikes differ from the reference\n";
    return kVerifyMismatch;
  }
  if (!trace.ok()) {
    err << "error: " << trace.faults.size() << " buffer fault(s); first: " << mem::to_string(trace.faults[0].kind)
        << " in " << mem::to_string(trace.faults[0].buffer) << ": " << trace.faults[0].detail << "\n";
    return kFault;
  }
  return kOk;
}

int cmd_traffic(const TrafficArgs& a, std::ostream& out) {
  const HardwareConfig cfg = load_config(a.config);
  const NetSource src = resolve_network(a.net, a.input_shape);
  if (!src.input) throw InvalidParameter("cannot tell the input shape of " + a.net + "; pass --input-shape CxHxW");
  const ValidatedNetwork net = validate(src.net, *src.input);
  const mem::FusionPlan plan = choose_plan("on", a.plan, net, cfg);
  const mem::TrafficComparison cmp = mem::compare_traffic(net, plan, a.timesteps, cfg.format);
  std::string text;
  if (a.report == "json") {
    text = traffic_to_json(cmp, plan).dump(2) + "\n";
  } else if (a.report == "csv") {
    text = traffic_to_csv(cmp);
  } else {
    text = "network      " + print_network(src.net) + " on " + src.input->str() + ", T=" + std::to_string(a.timesteps) +
           "\n" + traffic_to_text(cmp, plan);
  }
  emit(text, a.out, out);
  return kOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const HardwareConfig cfg = load_config(a.config);
  const double peak = arch::peak_gops(cfg);
  nlohmann::json j = {{"schema", RunReport::kSchema},
                      {"pe_count", cfg.pe_count()},
                      {"clock_hz", cfg.clock_hz},
                      {"peak_gops", peak},
                      {"time_steps", a.timesteps}};
  std::ostringstream text;
  text << "PEs " << cfg.pe_count() << " at " << cfg.clock_hz / 1e6 << " MHz\n";
  char line[200];
  std::snprintf(line, sizeof line, "peak %.1f GOPS\n\n%-10s %14s %8s %8s %12s %10s\n", peak, "preset", "cycles",
                "util", "steady", "GOPS", "ms");
  text << line;
  nlohmann::json rows = nlohmann::json::array();
  for (const Preset& p : presets()) {
    const ValidatedNetwork net = validate(parse_network(p.text), p.input);
    arch::CycleReport total;
    for (const auto& r : arch::estimate_network_cycles(net, a.timesteps, cfg)) total += r;
    total.pe_count = static_cast<std::uint64_t>(cfg.pe_count());
    total.clock_hz = cfg.clock_hz;
    std::snprintf(line, sizeof line, "%-10s %14llu %8.4f %8.4f %12.3f %10.3f\n", p.name.c_str(),
                  static_cast<unsigned long long>(total.total_cycles), total.utilization(), total.steady_utilization(),
                  total.achieved_gops(), total.seconds() * 1e3);
    text << line;
    rows.push_back({{"preset", p.name}, {"cycles", cycles_to_json(total)}});
  }
  j["presets"] = rows;
  emit(a.report == "json" ? j.dump(2) + "\n" : text.str(), a.out, out);
  return kOk;
}

int cmd_gen(const GenArgs& a, std::ostream& out) {
  const HardwareConfig cfg = load_config(a.config);
  const NetSource src = resolve_network(a.net, a.input_shape);
  if (!src.input) throw InvalidParameter("cannot tell the input shape of " + a.net + "; pass --input-shape CxHxW");
  RandomBundleOptions options;
  options.format = cfg.format;
  const ModelBundle bundle = generate_random_bundle(src.net, *src.input, a.seed, options);
  save_bundle(bundle, a.bundle);
  out << "bundle " << a.bundle << " crc32 " << hex32(bundle.checksum()) << "\n";
  if (!a.input.empty()) {
    save_input(generate_random_image(*src.input, a.seed), a.input);
    out << "input  " << a.input << " " << src.input->str() << "\n";
  }
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vectorwise SNN accelerator simulator"};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  const auto formats = CLI::IsMember({"json", "csv", "text"});

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Simulate a network on the datapath and report cycles and traffic");
  run->add_option("--net", ra.net, "Preset name (mnist, cifar10), grammar file or grammar string");
  run->add_option("--input-shape", ra.input_shape, "Input CxHxW for non-preset networks");
  run->add_option("--bundle", ra.bundle, "VSA1 model bundle (random from --seed when absent)");
  run->add_option("--input", ra.input, "Raw input tensor (random from --seed when absent)");
  run->add_option("--seed", ra.seed, "Seed for generated bundle and input");
  run->add_option("--timesteps", ra.timesteps, "Time steps T")->check(CLI::PositiveNumber);
  run->add_option("--fusion", ra.fusion, "Layer fusion with the automatic plan")->check(CLI::IsMember({"on", "off"}));
  run->add_option("--fusion-plan", ra.fusion_plan, "Explicit fusion plan JSON file");
  run->add_flag("--verify", ra.verify, "Compare every layer against the reference model");
  run->add_flag("--cycles-only", ra.cycles_only, "Skip the functional run; cycle counts from shapes");
  run->add_flag("--deterministic", ra.deterministic, "Omit the timestamp so reports are byte-identical");
  run->add_option("--report", ra.report, "Report format")->check(formats);
  run->add_option("--out", ra.out, "Write the report here instead of stdout");
  run->add_option("--config", ra.config, "Hardware config JSON");

  TrafficArgs ta;
  auto* traffic = app.add_subcommand("traffic", "DRAM traffic ledger with and without layer fusion");
  traffic->add_option("--net", ta.net, "Preset name, grammar file or grammar string")->required();
  traffic->add_option("--input-shape", ta.input_shape, "Input CxHxW for non-preset networks");
  traffic->add_option("--timesteps", ta.timesteps, "Time steps T")->check(CLI::PositiveNumber);
  traffic->add_option("--fusion-plan", ta.plan, "auto, none, or a plan JSON file");
  traffic->add_option("--report", ta.report, "Report format")->check(formats);
  traffic->add_option("--out", ta.out, "Write the report here instead of stdout");
  traffic->add_option("--config", ta.config, "Hardware config JSON");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Peak and achieved throughput of the presets");
  bench->add_option("--config", ba.config, "Hardware config JSON");
  bench->add_option("--timesteps", ba.timesteps, "Time steps T")->check(CLI::PositiveNumber);
  bench->add_option("--report", ba.report, "Report format")->check(CLI::IsMember({"json", "text"}));
  bench->add_option("--out", ba.out, "Write the report here instead of stdout");

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Write a random model bundle and input tensor");
  gen->add_option("--net", ga.net, "Preset name, grammar file or grammar string")->required();
  gen->add_option("--input-shape", ga.input_shape, "Input CxHxW for non-preset networks");
  gen->add_option("--seed", ga.seed, "Random seed");
  gen->add_option("--bundle", ga.bundle, "Bundle output path")->required();
  gen->add_option("--input", ga.input, "Input tensor output path");
  gen->add_option("--config", ga.config, "Hardware config JSON (fixed-point format)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kArgumentError;
  }

  try {
    if (*run) return cmd_run(ra, out, err);
    if (*traffic) return cmd_traffic(ta, out);
    if (*bench) return cmd_bench(ba, out);
    if (*gen) return cmd_gen(ga, out);
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << "\n";
    return kArgumentError;
  } catch (const FixedPointOverflow& e) {
    err << "error: " << e.what() << "\n";
    return kFault;
  } catch (const CapacityFault& e) {
    err << "error: " << e.what() << "\n";
    return kFault;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kArgumentError;
}

}  // namespace vsa::cli
