// Acceptance checks, one line per criterion. Every expected value comes from
// the arithmetic in this file (test_support.hpp for the convolutions), not
// from the simulator's own reference model.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "vsa/cli.hpp"
#include "vsa/engine.hpp"
#include "vsa/errors.hpp"
#include "vsa/network.hpp"
#include "vsa/neuron.hpp"
#include "vsa/reference.hpp"
#include "vsa/scheduler.hpp"
#include "vsa/traffic.hpp"

using namespace vsa;
using vsa::testing::uniform_int;
using vsa::testing::uniform_real;

namespace {

struct Outcome {
  bool pass = false;
  std::string details;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Random 1-4 layer network on an input of at most 16x16.
struct RandomCase {
  std::string text;
  Shape3 input;
  int time_steps;
};

RandomCase draw_network(std::mt19937_64& rng) {
  for (;;) {
    RandomCase rc;
    rc.input = {uniform_int(rng, 1, 3), uniform_int(rng, 2, 16), uniform_int(rng, 2, 16)};
    rc.time_steps = uniform_int(rng, 1, 8);
    const int layers = uniform_int(rng, 1, 4);
    Shape3 cur = rc.input;
    bool flat = false, ok = true;
    std::string text;
    for (int i = 0; i < layers && ok; ++i) {
      const int kind = i == 0 ? 0 : uniform_int(rng, 1, 3);  // 0 enc, 1 conv, 2 MP2, 3 fc
      if (i) text += "-";
      if (kind == 2) {
        if (flat || cur.height % 2 || cur.width % 2) {
          ok = false;
          break;
        }
        text += "MP2";
        cur = {cur.channels, cur.height / 2, cur.width / 2};
        continue;
      }
      const int ch = uniform_int(rng, 1, 64);
      if (kind == 3) {
        text += std::to_string(ch) + "fc";
        cur = {ch, 1, 1};
        flat = true;
        continue;
      }
      if (flat) {
        ok = false;
        break;
      }
      const int kh = uniform_int(rng, 1, 3), kw = uniform_int(rng, 1, 3);
      const int pad = uniform_int(rng, 0, 1);
      const int oh = cur.height + 2 * pad - kh + 1, ow = cur.width + 2 * pad - kw + 1;
      if (oh <= 0 || ow <= 0) {
        ok = false;
        break;
      }
      text += std::to_string(ch) + (kind == 0 ? "Conv(encoding)" : "Conv");
      text += "{vth=" + fmt("%.3f", uniform_real(rng, 0.5, 1.5)) + ",k=" + std::to_string(kh) + "x" +
              std::to_string(kw) + ",pad=" + std::to_string(pad) + "}";
      cur = {ch, oh, ow};
    }
    if (!ok) continue;
    rc.text = text;
    return rc;
  }
}

Outcome criterion1() {
  auto& rng = vsa::testing::rng_for(1001);
  const auto start = std::chrono::steady_clock::now();
  int matched = 0, mismatched = 0, overflow_agree = 0, overflow_disagree = 0;
  std::size_t spikes = 0;
  HardwareConfig cfg;
  while (matched + mismatched < 200) {
    const RandomCase rc = draw_network(rng);
    const ModelBundle b = generate_random_bundle(parse_network(rc.text), rc.input, rng());
    const ByteImage img = vsa::testing::random_image(rng, rc.input);
    cfg.array_rows = uniform_int(rng, 3, 8);
    cfg.group_size = uniform_int(rng, 4, 32);
    bool engine_overflow = false, oracle_overflow = false;
    arch::EngineRun run;
    NetworkRun ref;
    try {
      run = arch::run_network_engine(b, img, rc.time_steps, cfg);
    } catch (const FixedPointOverflow&) {
      engine_overflow = true;
    }
    try {
      ref = run_network_oracle(b, img, rc.time_steps);
    } catch (const FixedPointOverflow&) {
      oracle_overflow = true;
    }
    if (engine_overflow || oracle_overflow) {
      (engine_overflow == oracle_overflow ? overflow_agree : overflow_disagree)++;
      continue;
    }
    (run.layer_outputs == ref.layer_outputs && run.class_counts == ref.class_counts ? matched : mismatched)++;
    for (const auto& train : ref.layer_outputs) spikes += train.popcount();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {mismatched == 0 && overflow_disagree == 0 && secs < 120.0,
          fmt("%d/%d random networks bit-exact over %zu spikes, %d overflow cases raised by both, %d disagreeing, %.1f s", matched,
              matched + mismatched, spikes, overflow_agree, overflow_disagree, secs)};
}

// Folded-domain potential trajectory in exact arithmetic; false when any step
// lands within the margin of the threshold.
bool clear_of_threshold(const std::vector<double>& x, const BNParams& bn, double v_th, double margin) {
  const long double s = std::sqrt(static_cast<long double>(bn.variance) + bn.epsilon);
  const long double bias = bn.mean - s / bn.gamma * bn.beta;
  const long double th = s / bn.gamma * v_th;
  long double v = 0;
  bool fired = false;
  for (double xi : x) {
    v = (fired ? 0 : v) + (xi - bias);
    if (std::fabs(static_cast<double>(v - th)) <= margin) return false;
    fired = bn.gamma > 0 ? v >= th : v <= th;
  }
  return true;
}

Outcome criterion2() {
  auto& rng = vsa::testing::rng_for(1002);
  const FixedFormat format;
  const double margin = std::ldexp(1.0, -6);
  int accepted = 0, agree = 0, filtered = 0, negative = 0;
  while (accepted < 1000) {
    BNParams bn;
    bn.gamma = uniform_real(rng, 0.25, 2.0) * ((rng() & 1u) ? -1.0 : 1.0);
    bn.beta = uniform_real(rng, -1, 1);
    bn.mean = uniform_real(rng, -1, 1);
    bn.variance = uniform_real(rng, 0.1, 4);
    bn.epsilon = 1e-5;
    const double v_th = uniform_real(rng, 0.25, 2.0);
    std::vector<double> x(static_cast<std::size_t>(uniform_int(rng, 1, 8)));
    for (auto& xi : x) xi = uniform_int(rng, -12, 12);
    if (!clear_of_threshold(x, bn, v_th, margin)) {
      ++filtered;
      continue;
    }
    ++accepted;
    negative += bn.gamma < 0;
    const auto folded = spikes_folded(x, fold_bn(bn, v_th, format), format);
    const auto unfolded = spikes_unfolded_oracle(x, bn, v_th);
    agree += folded == unfolded;
  }
  return {agree == accepted, fmt("%d/%d spike trains identical (%d with negative gamma), %d near-threshold draws "
                                 "filtered at margin 2^-6",
                                 agree, accepted, negative, filtered)};
}

Outcome criterion3() {
  HardwareConfig cfg;
  cfg.array_rows = 5;
  auto& rng = vsa::testing::rng_for(1003);
  bool ok = true;
  std::string note;
  for (int trial = 0; trial < 20 && ok; ++trial) {
    const SpikeMap in = vsa::testing::random_spikes(rng, {1, 5, 5});
    const BinaryWeightTensor w = vsa::testing::random_weights(rng, 1, 1, 3, 3);
    const arch::ConvSchedule s = arch::schedule_conv_layer(in, w, cfg, true);
    ok &= s.cycles.steady_cycles == 3 && s.cycles.warmup_cycles == 2 && s.trace.size() == 3;
    for (const auto& col : s.trace) {
      ok &= col.partial.size() == 7;
      // Full vertical convolution of the three input columns under the kernel.
      for (int d = 0; d < 7 && ok; ++d) {
        int sum = 0;
        for (int a = 0; a < 3; ++a)
          for (int r = 0; r < 5; ++r) {
            const int k = d - r;
            if (k < 0 || k > 2) continue;
            sum += in.at(0, r, col.column + a) * w.weight(0, 0, 2 - k, a);
          }
        ok &= col.partial[static_cast<std::size_t>(d)] == sum;
      }
    }
    int oh = 0, ow = 0;
    const auto ref = vsa::testing::direct_conv(1, 5, 5, w, 0, [&](int c, int y, int x) { return in.at(c, y, x); },
                                               oh, ow);
    ok &= vsa::testing::equals(s.output, ref);
    if (trial == 0) {
      note = fmt("%llu steady + %llu warmup cycles, %zu columns of %zu partial sums",
                 static_cast<unsigned long long>(s.cycles.steady_cycles),
                 static_cast<unsigned long long>(s.cycles.warmup_cycles), s.trace.size(), s.trace[0].partial.size());
    }
  }
  return {ok, note + ", 20 fixtures match the column and output oracles"};
}

Outcome criterion4() {
  const HardwareConfig cfg;
  const double peak = arch::peak_gops(cfg);
  const double expected_peak = 32.0 * 3 * 8 * 3 * 2 * 500e6 / 1e9;
  // 32x32 valid conv input, Cin = Cout = 128, 3x3.
  auto& rng = vsa::testing::rng_for(1004);
  const SpikeMap in = vsa::testing::random_spikes(rng, {128, 32, 32});
  const BinaryWeightTensor w = vsa::testing::random_weights(rng, 128, 128, 3, 3);
  const arch::ConvSchedule s = arch::schedule_conv_layer(in, w, cfg);
  const arch::CycleReport est = arch::estimate_conv_cycles({128, 32, 32}, 128, 3, 3, false, cfg);
  const bool ok = peak == 2304.0 && expected_peak == peak && s.cycles == est &&
                  s.cycles.steady_utilization() == 1.0 && s.cycles.utilization() >= 0.95 &&
                  s.output == conv2d_oracle(in, w, 0);
  return {ok, fmt("peak %.1f GOPS, steady utilization %.4f, %.4f including %llu warmup cycles", peak,
                  s.cycles.steady_utilization(), s.cycles.utilization(),
                  static_cast<unsigned long long>(s.cycles.warmup_cycles))};
}

Outcome criterion5() {
  const auto preset = find_preset("cifar10");
  const ValidatedNetwork net = validate(parse_network(preset->text), preset->input);
  const HardwareConfig cfg;
  const int T = 8;
  const mem::FusionPlan plan = mem::plan_fusion(net, cfg);
  const mem::TrafficComparison cmp = mem::compare_traffic(net, plan, T, cfg.format);
  const auto stages = mem::compute_stages(net);
  std::uint64_t identity = 0;
  for (const auto& g : plan.groups) {
    if (g.size() != 2) continue;
    const Shape3 o = stages[static_cast<std::size_t>(g[0])].output;
    identity += 2 * ((o.count() + 7) / 8) * T;
  }
  const double pct = cmp.percent_reduction();
  const double kb_before = cmp.unfused.spike_view() / 1024.0, kb_after = cmp.fused.spike_view() / 1024.0;
  std::uint64_t itemized = 0;
  for (const auto& item : cmp.fused.items()) itemized += item.bytes;
  const bool ok = cmp.savings == identity && plan.fused_pairs() > 0 && std::fabs(pct - 35.3) <= 5.0 &&
                  itemized == cmp.fused.total() && fmt("%.3f", kb_before) == "1450.172" &&
                  fmt("%.3f", kb_after) == "938.172";
  return {ok, fmt("savings %llu B = identity %llu B, reduction %.2f%% of all traffic; spike view %.3f KB -> %.3f KB "
                  "(%.2f%%), the gap is the fc weight, folded parameter and classifier I/O lines",
                  static_cast<unsigned long long>(cmp.savings), static_cast<unsigned long long>(identity), pct,
                  kb_before, kb_after, cmp.spike_view_percent_reduction())};
}

Outcome criterion6() {
  auto& rng = vsa::testing::rng_for(1006);
  const HardwareConfig cfg;
  int ok = 0;
  const int cases = 100;
  for (int i = 0; i < cases; ++i) {
    const Shape3 shape{3, uniform_int(rng, 1, 32), uniform_int(rng, 1, 32)};
    const ByteImage img = vsa::testing::random_image(rng, shape);
    const BinaryWeightTensor w = vsa::testing::random_weights(rng, uniform_int(rng, 1, 8), 3, 3, 3);
    const arch::ConvSchedule s = arch::schedule_encoding_layer(arch::pad_image(img, 1), w, cfg);
    int oh = 0, ow = 0;
    const auto ref = vsa::testing::direct_conv(3, shape.height, shape.width, w, 1,
                                               [&](int c, int y, int x) { return img.at(c, y, x); }, oh, ow);
    ok += vsa::testing::equals(s.output, ref);
  }
  return {ok == cases, fmt("%d/%d random 8-bit 3-channel images match the integer conv", ok, cases)};
}

Outcome criterion7() {
  auto& rng = vsa::testing::rng_for(1007);
  HardwareConfig tiled;  // R = 8
  HardwareConfig untiled;
  untiled.array_rows = 32;
  HardwareConfig grouped;  // group 32
  HardwareConfig ungrouped;
  ungrouped.pe_blocks = 128;
  ungrouped.group_size = 128;
  int tile_ok = 0, group_ok = 0, multi_tile = 0, multi_group = 0;
  const int cases = 100;
  for (int i = 0; i < cases; ++i) {
    const Shape3 shape{uniform_int(rng, 1, 32), uniform_int(rng, 3, 32), uniform_int(rng, 3, 16)};
    const SpikeMap in = vsa::testing::random_spikes(rng, shape, uniform_int(rng, 5, 95));
    const BinaryWeightTensor w = vsa::testing::random_weights(rng, uniform_int(rng, 1, 4), shape.channels,
                                                              uniform_int(rng, 1, 3), uniform_int(rng, 1, 3));
    int oh = 0, ow = 0;
    const auto ref = vsa::testing::direct_conv(shape.channels, shape.height, shape.width, w, 0,
                                               [&](int c, int y, int x) { return in.at(c, y, x); }, oh, ow);
    const IntTensor a = arch::schedule_conv_layer(in, w, tiled).output;
    const IntTensor b = arch::schedule_conv_layer(in, w, untiled).output;
    tile_ok += vsa::testing::equals(a, ref) && a == b;
    multi_tile += shape.height > 8;
  }
  for (int i = 0; i < cases; ++i) {
    const Shape3 shape{uniform_int(rng, 1, 128), uniform_int(rng, 3, 12), uniform_int(rng, 3, 12)};
    const SpikeMap in = vsa::testing::random_spikes(rng, shape, uniform_int(rng, 5, 95));
    const BinaryWeightTensor w = vsa::testing::random_weights(rng, uniform_int(rng, 1, 3), shape.channels, 3, 3);
    int oh = 0, ow = 0;
    const auto ref = vsa::testing::direct_conv(shape.channels, shape.height, shape.width, w, 0,
                                               [&](int c, int y, int x) { return in.at(c, y, x); }, oh, ow);
    const IntTensor a = arch::schedule_conv_layer(in, w, grouped).output;
    const IntTensor b = arch::schedule_conv_layer(in, w, ungrouped).output;
    group_ok += vsa::testing::equals(a, ref) && a == b;
    multi_group += shape.channels > 32;
  }
  return {tile_ok == cases && group_ok == cases,
          fmt("tiling %d/%d (%d span several tiles), grouping %d/%d (%d span several groups)", tile_ok, cases,
              multi_tile, group_ok, cases, multi_group)};
}

Outcome criterion8() {
  auto invoke = [](std::vector<std::string> args) {
    std::vector<const char*> argv{"vsa"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = vsa::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return std::pair{code, out.str()};
  };
  bool ok = true;
  std::size_t bytes = 0;
  for (const char* format : {"json", "csv", "text"}) {
    const std::vector<std::string> args{"run", "--net", "mnist", "--seed", "7", "--verify", "--deterministic",
                                        "--report", format};
    const auto a = invoke(args), b = invoke(args);
    ok &= a.first == 0 && b.first == 0 && a.second == b.second && !a.second.empty();
    bytes += a.second.size();
  }
  return {ok, fmt("json, csv and text reports byte-identical across two runs (%zu bytes compared)", bytes)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"engine spike trains equal the reference on random networks", criterion1},
      {"folded BN neuron equals the unfolded neuron", criterion2},
      {"5x5 / 3x3 column schedule", criterion3},
      {"peak throughput and steady-state utilization", criterion4},
      {"CIFAR-10 fusion traffic", criterion5},
      {"bitplane encoding equals the integer conv", criterion6},
      {"tiling and channel grouping equal the untiled, ungrouped result", criterion7},
      {"deterministic reports", criterion8},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %zu: %s - %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.details.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
