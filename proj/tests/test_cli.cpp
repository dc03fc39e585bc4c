#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vsa/cli.hpp"
#include "vsa/report.hpp"

using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "vsa");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = vsa::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / "vsa_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("argument errors exit with 2") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"run", "--net", "mnist", "--timesteps", "0"}).code == 2);
  CHECK(cli({"run", "--net", "mnist", "--report", "xml"}).code == 2);
  CHECK(cli({"run", "--net", "mnist", "--fusion", "maybe"}).code == 2);
  CHECK(cli({"run"}).code == 2);
  CHECK(cli({"run", "--net", "8Conv(encoding)-4fc"}).code == 2);
  CHECK(cli({"run", "--net", "mnist", "--verify", "--cycles-only"}).code == 2);
  CHECK(cli({"traffic", "--net", "mnist", "--input-shape", "1x28"}).code == 2);
  CHECK(cli({"traffic"}).code == 2);
  const Result help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("Exit codes") != std::string::npos);
}

TEST_CASE("validation errors exit with 3") {
  CHECK(cli({"run", "--net", "8Conv(encoding)-MP3", "--input-shape", "1x8x8"}).code == 3);
  CHECK(cli({"run", "--net", "mnist", "--input-shape", "1x27x27"}).code == 3);
  CHECK(cli({"run", "--net", "8Conv(encoding){k=5}-4fc", "--input-shape", "1x8x8"}).code == 3);
  const auto plan = scratch("bad_plan.json");
  std::ofstream(plan) << R"({"groups": [[0], [2, 1], [3]]})";
  CHECK(cli({"traffic", "--net", "mnist", "--fusion-plan", plan.string()}).code == 3);
}

TEST_CASE("run on MNIST with --verify") {
  const Result r = cli({"run", "--net", "mnist", "--verify", "--deterministic", "--report", "json"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["oracle_match"] == true);
  CHECK(j["bundle_checksum"] == "f2239b3b");
  CHECK(j["layers"].size() == 6);
  CHECK(j["buffers"]["faults"].empty());
  CHECK(j["buffers"]["dram_bytes"] == j["traffic"]["total_bytes"]);
  CHECK_FALSE(j.contains("timestamp"));

  const vsa::RunReport rep = vsa::run_report_from_json(j);
  CHECK(vsa::to_json(rep) == j);
  std::uint64_t cycles = 0;
  for (const auto& l : rep.layers) cycles += l.cycles.total_cycles;
  CHECK(rep.totals.total_cycles == cycles);
}

TEST_CASE("report formats") {
  const Result plain = cli({"run", "--net", "mnist", "--timesteps", "2", "--report", "json"});
  REQUIRE(plain.code == 0);
  CHECK_FALSE(json::parse(plain.out).contains("oracle_match"));
  CHECK(json::parse(plain.out).contains("timestamp"));

  const Result csv = cli({"run", "--net", "mnist", "--timesteps", "2", "--report", "csv"});
  REQUIRE(csv.code == 0);
  CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 6 + 2);
  CHECK(csv.out.find("total,") != std::string::npos);

  const Result text = cli({"run", "--net", "mnist", "--timesteps", "2", "--report", "text"});
  REQUIRE(text.code == 0);
  CHECK(text.out.find("64Conv(encoding)") != std::string::npos);

  const auto path = scratch("report.json");
  const Result file = cli({"run", "--net", "mnist", "--timesteps", "2", "--deterministic", "--report", "json", "--out", path.string()});
  REQUIRE(file.code == 0);
  CHECK(file.out.empty());
  CHECK(json::parse(slurp(path))["time_steps"] == 2);
}

TEST_CASE("CIFAR-10 cycle estimate with and without fusion") {
  const Result off = cli({"run", "--net", "cifar10", "--cycles-only", "--fusion", "off", "--deterministic", "--report", "json"});
  const Result on = cli({"run", "--net", "cifar10", "--cycles-only", "--fusion", "on", "--deterministic", "--report", "json"});
  // the default spike SRAM cannot hold all eight 32x32x128 maps
  CHECK(off.code == 4);
  CHECK(on.code == 4);
  const json a = json::parse(off.out), b = json::parse(on.out);
  CHECK(a["totals"] == b["totals"]);
  CHECK(a["traffic"]["total_bytes"] == 1631292);
  CHECK(b["traffic"]["total_bytes"] == 1107004);
  CHECK(a["fusion"] == false);
  CHECK(b["fusion"] == true);
  CHECK_FALSE(a["buffers"]["faults"].empty());
  CHECK(a["class_counts"].empty());
}

TEST_CASE("traffic subcommand") {
  const Result j = cli({"traffic", "--net", "cifar10", "--report", "json"});
  REQUIRE(j.code == 0);
  const json t = json::parse(j.out);
  CHECK(t["savings_bytes"] == 524288);
  CHECK(t["savings_bytes"] == t["identity_savings_bytes"]);
  CHECK(t["percent_reduction"].get<double>() == doctest::Approx(32.14).epsilon(0.001));

  const Result none = cli({"traffic", "--net", "cifar10", "--fusion-plan", "none", "--report", "json"});
  REQUIRE(none.code == 0);
  CHECK(json::parse(none.out)["savings_bytes"] == 0);

  const Result text = cli({"traffic", "--net", "cifar10", "--timesteps", "8"});
  REQUIRE(text.code == 0);
  CHECK(text.out.find("1450.172 KB -> 938.172 KB") != std::string::npos);

  const Result csv = cli({"traffic", "--net", "mnist", "--report", "csv"});
  CHECK(csv.code == 0);
  CHECK_FALSE(csv.out.empty());
}

TEST_CASE("bench subcommand") {
  const Result r = cli({"bench", "--report", "json"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["pe_count"] == 2304);
  CHECK(j["peak_gops"].get<double>() == doctest::Approx(2304.0));
  CHECK(j["presets"].size() == 2);
  CHECK(cli({"bench"}).out.find("peak 2304.0 GOPS") != std::string::npos);

  const auto cfg = scratch("half_clock.json");
  std::ofstream(cfg) << R"({"clock_hz": 250000000})";
  const Result half = cli({"bench", "--report", "json", "--config", cfg.string()});
  REQUIRE(half.code == 0);
  CHECK(json::parse(half.out)["peak_gops"].get<double>() == doctest::Approx(1152.0));
  const auto bad = scratch("bad_cfg.json");
  std::ofstream(bad) << R"({"pe_blocks": 0})";
  CHECK(cli({"bench", "--config", bad.string()}).code == 3);
}

TEST_CASE("gen then run from files") {
  const auto bundle = scratch("net.vsab");
  const auto input = scratch("net.bin");
  const std::string net = "8Conv(encoding)-MP2-8Conv-4fc";
  const Result g = cli({"gen", "--net", net, "--input-shape", "2x8x8", "--seed", "3", "--bundle", bundle.string(),
                        "--input", input.string()});
  REQUIRE(g.code == 0);
  const Result r = cli({"run", "--bundle", bundle.string(), "--input", input.string(), "--verify", "--deterministic", "--report", "json"});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["oracle_match"] == true);
  CHECK(json::parse(r.out)["input"] == "2x8x8");

  const Result mismatch = cli({"run", "--bundle", bundle.string(), "--net", "mnist"});
  CHECK(mismatch.code == 3);
  const Result match = cli({"run", "--bundle", bundle.string(), "--net", net, "--input-shape", "2x8x8"});
  CHECK(match.code == 0);

  std::string bytes = slurp(bundle);
  bytes[bytes.size() / 2] ^= 0x40;
  const auto corrupt = scratch("corrupt.vsab");
  std::ofstream(corrupt, std::ios::binary) << bytes;
  CHECK(cli({"run", "--bundle", corrupt.string()}).code == 6);
  CHECK(cli({"run", "--bundle", scratch("absent.vsab").string()}).code == 6);
  CHECK(cli({"run", "--net", "mnist", "--input", scratch("absent.bin").string()}).code == 6);
}

TEST_CASE("network grammar from a file") {
  const auto path = scratch("net.txt");
  std::ofstream(path) << "16Conv(encoding)-MP2-\n10fc\n";
  const Result r = cli({"traffic", "--net", path.string(), "--input-shape", "1x4x4", "--report", "json"});
  CHECK(r.code == 0);
}

TEST_CASE("deterministic runs are byte-identical") {
  const std::vector<std::string> args{"run", "--net", "mnist", "--seed", "5", "--timesteps", "3", "--deterministic"};
  CHECK(cli(args).out == cli(args).out);
}
