#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "vsa/accumulator.hpp"
#include "vsa/engine.hpp"
#include "vsa/errors.hpp"
#include "vsa/hardware_config.hpp"
#include "vsa/if_unit.hpp"
#include "vsa/network.hpp"
#include "vsa/pe_array.hpp"
#include "vsa/reference.hpp"
#include "vsa/scheduler.hpp"

using namespace vsa;
using namespace vsa::arch;
using vsa::testing::uniform_int;

namespace {

HardwareConfig small_config(int rows, int group) {
  HardwareConfig cfg;
  cfg.array_rows = rows;
  cfg.group_size = group;
  return cfg;
}

std::vector<std::int64_t> reference(const SpikeMap& in, const BinaryWeightTensor& w, int& oh, int& ow) {
  return vsa::testing::direct_conv(in.shape().channels, in.shape().height, in.shape().width, w, 0,
                                   [&](int c, int y, int x) { return in.at(c, y, x); }, oh, ow);
}

}  // namespace

TEST_CASE("PE multiply truth table") {
  CHECK(pe_multiply(0, 0).value == 0);
  CHECK(pe_multiply(0, 1).value == 0);
  CHECK(pe_multiply(1, 0).value == 1);
  CHECK(pe_multiply(1, 1).value == -1);
  CHECK(pe_multiply(0, 0).bits == 0b00);
  CHECK(pe_multiply(0, 1).bits == 0b00);
  CHECK(pe_multiply(1, 0).bits == 0b01);
  CHECK(pe_multiply(1, 1).bits == 0b11);
}

TEST_CASE("PE array sums along diagonals") {
  PEArrayState st(5, 3);
  const std::vector<std::uint8_t> ones5(5, 1), plus3(3, 0);
  CHECK(pe_array_cycle(st, ones5, plus3) == std::vector<std::int32_t>{1, 2, 3, 3, 3, 2, 1});

  auto& rng = vsa::testing::rng_for(31);
  PEArrayState big(8, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint8_t> in(8), w(3);
    std::vector<int> in_i(8), w_i(3);
    for (int r = 0; r < 8; ++r) in_i[r] = in[r] = static_cast<std::uint8_t>(rng() & 1u);
    for (int k = 0; k < 3; ++k) {
      w[k] = static_cast<std::uint8_t>(rng() & 1u);
      w_i[k] = w[k] ? -1 : 1;
    }
    const auto got = pe_array_cycle(big, in, w);
    const auto want = vsa::testing::full_conv1d(in_i, w_i);
    CHECK(got == want);
  }
}

TEST_CASE("stage-1 accumulation") {
  const std::vector<PartialSums> arrays{{1, 2, 3}, {0, -1, 4}, {2, 2, 2}};
  CHECK(accumulate_stage1(arrays, AccumulateMode::kSpiking) == PartialSums{3, 3, 9});
  CHECK(accumulate_stage1(arrays, AccumulateMode::kEncoding, 0) == PartialSums{3, 3, 9});
  CHECK(accumulate_stage1(arrays, AccumulateMode::kEncoding, 3) == PartialSums{24, 24, 72});
  CHECK(accumulate_stage1({{1, 0}, {2, 1}}, AccumulateMode::kEncoding, 7) == PartialSums{384, 128});
  CHECK_THROWS_AS(accumulate_stage1({{1, 2}, {1}}, AccumulateMode::kSpiking), ShapeError);
  CHECK_THROWS_AS(accumulate_stage1(arrays, AccumulateMode::kEncoding, 8), InvalidParameter);
}

TEST_CASE("adder tree and group accumulation") {
  GroupState g(2);
  CHECK_FALSE(accumulate_tree({{1, 2}, {3, 4}, {5, 6}}, g, false, 4).has_value());
  CHECK_FALSE(g.complete());
  CHECK_THROWS_AS(g.result(), ScheduleError);
  const auto r = accumulate_tree({{-1, 1}}, g, true, 4);
  REQUIRE(r.has_value());
  CHECK(*r == PartialSums{8, 13});
  CHECK(g.groups_seen() == 2);
  CHECK(g.result() == PartialSums{8, 13});
  const PartialSums more{1, 1};
  CHECK_THROWS_AS(g.accumulate(more, true), ScheduleError);

  GroupState h(1);
  CHECK_THROWS_AS(accumulate_tree({{1}, {1}, {1}}, h, true, 2), ScheduleError);
}

TEST_CASE("boundary SRAM holds each seam exactly once") {
  TileBoundary b;
  const PartialSums rows{4, 5};
  b.deposit({0, 3, 1}, rows);
  CHECK_THROWS_AS(b.deposit({0, 3, 1}, rows), ScheduleError);
  b.deposit({0, 4, 1}, rows);
  CHECK(b.size() == 2);
  CHECK(b.consume({0, 3, 1}) == rows);
  CHECK_THROWS_AS(b.consume({0, 3, 1}), ScheduleError);
  CHECK(b.peak_entries() == 2);
  CHECK(b.peak_values() == 4);
  CHECK(b.deposits() == 2);
  b.consume({0, 4, 1});
  CHECK(b.empty());
}

TEST_CASE("1x1 convolution schedules one cycle per column") {
  HardwareConfig cfg;
  SpikeMap in({1, 1, 4});
  in.set(0, 0, 1, 1);
  in.set(0, 0, 3, 1);
  BinaryWeightTensor w(2, 1, 1, 1);
  w.set_sign(1, 0, 0, 0, 1);
  const ConvSchedule s = schedule_conv_layer(in, w, cfg);
  CHECK(s.output.at(0, 0, 1) == 1);
  CHECK(s.output.at(1, 0, 3) == -1);
  CHECK(s.output.at(0, 0, 0) == 0);
  CHECK(s.cycles.warmup_cycles == 0);
  CHECK(s.cycles.steady_cycles == 8);
  CHECK(s.cycles.passes == 2);
}

TEST_CASE("5x5 input, 3x3 kernel, R = 5 column schedule") {
  const HardwareConfig cfg = small_config(5, 32);
  auto& rng = vsa::testing::rng_for(32);
  const SpikeMap in = vsa::testing::random_spikes(rng, {1, 5, 5});
  const BinaryWeightTensor w = vsa::testing::random_weights(rng, 1, 1, 3, 3);
  const ConvSchedule s = schedule_conv_layer(in, w, cfg, true);
  CHECK(s.cycles.warmup_cycles == 2);
  CHECK(s.cycles.steady_cycles == 3);
  CHECK(s.cycles.total_cycles == 5);
  REQUIRE(s.trace.size() == 3);
  for (const auto& col : s.trace) CHECK(col.partial.size() == 7);
  CHECK(s.trace.front().cycle == 3);
  int oh = 0, ow = 0;
  CHECK(vsa::testing::equals(s.output, reference(in, w, oh, ow)));
}

TEST_CASE("tall input crosses tile seams and empties the boundary SRAM") {
  const HardwareConfig cfg = small_config(8, 32);
  auto& rng = vsa::testing::rng_for(33);
  for (int trial = 0; trial < 10; ++trial) {
    const Shape3 shape{uniform_int(rng, 1, 40), uniform_int(rng, 9, 30), uniform_int(rng, 3, 12)};
    const SpikeMap in = vsa::testing::random_spikes(rng, shape);
    const BinaryWeightTensor w = vsa::testing::random_weights(rng, 3, shape.channels, 3, 3);
    const ConvSchedule s = schedule_conv_layer(in, w, cfg);
    int oh = 0, ow = 0;
    CHECK(vsa::testing::equals(s.output, reference(in, w, oh, ow)));
    CHECK(s.output == conv2d_oracle(in, w, 0));
    CHECK(s.boundary.deposits > 0);
    CHECK(s.boundary.peak_bytes == s.boundary.peak_values * 2);
  }
}

TEST_CASE("analytic estimate equals the functional schedule") {
  auto& rng = vsa::testing::rng_for(34);
  for (int trial = 0; trial < 20; ++trial) {
    const HardwareConfig cfg = small_config(uniform_int(rng, 2, 8), uniform_int(rng, 1, 32));
    const int kh = uniform_int(rng, 1, 3), kw = uniform_int(rng, 1, 3);
    const Shape3 shape{uniform_int(rng, 1, 70), uniform_int(rng, 3, 20), uniform_int(rng, 3, 20)};
    const SpikeMap in = vsa::testing::random_spikes(rng, shape);
    const BinaryWeightTensor w = vsa::testing::random_weights(rng, 2, shape.channels, kh, kw);
    const ConvSchedule s = schedule_conv_layer(in, w, cfg);
    CHECK(s.cycles == estimate_conv_cycles(shape, 2, kh, kw, false, cfg));
    CHECK(s.output == conv2d_oracle(in, w, 0));
  }
}

TEST_CASE("kernel larger than the PE array is rejected") {
  const HardwareConfig cfg;
  CHECK_THROWS_AS(estimate_conv_cycles({1, 8, 8}, 1, 5, 5, false, cfg), ConfigError);
  CHECK_THROWS_AS(estimate_conv_cycles({1, 8, 8}, 1, 3, 4, false, cfg), ConfigError);
}

TEST_CASE("encoding layer splits pixels into bitplanes") {
  const HardwareConfig cfg;
  CHECK(channels_per_pass(cfg, true) == 4);
  ByteImage one({1, 1, 1}, {5});
  BinaryWeightTensor w(1, 1, 1, 1);
  CHECK(schedule_encoding_layer(one, w, cfg).output.at(0, 0, 0) == 5);
  w.set_sign(0, 0, 0, 0, 1);
  CHECK(schedule_encoding_layer(ByteImage({1, 1, 1}, {255}), w, cfg).output.at(0, 0, 0) == -255);

  auto& rng = vsa::testing::rng_for(35);
  for (int trial = 0; trial < 10; ++trial) {
    const Shape3 shape{uniform_int(rng, 1, 6), uniform_int(rng, 3, 20), uniform_int(rng, 3, 10)};
    const ByteImage img = vsa::testing::random_image(rng, shape);
    const BinaryWeightTensor wr = vsa::testing::random_weights(rng, 3, shape.channels, 3, 3);
    const ConvSchedule s = schedule_encoding_layer(img, wr, cfg);
    int oh = 0, ow = 0;
    const auto ref = vsa::testing::direct_conv(shape.channels, shape.height, shape.width, wr, 0,
                                               [&](int c, int y, int x) { return img.at(c, y, x); }, oh, ow);
    CHECK(vsa::testing::equals(s.output, ref));
    CHECK(s.cycles == estimate_conv_cycles(shape, 3, 3, 3, true, cfg));
  }
}

TEST_CASE("IF unit integrates and resets") {
  const FixedFormat fmt;
  const FoldedNeuronParams p{Fixed{0}, fmt.quantize(1.0), false};
  const std::vector<FoldedNeuronParams> params{p};
  IfUnit unit({1, 1, 1}, fmt, IfMode::kSpiking);
  IntTensor half({1, 1, 1});
  std::vector<int> spikes;
  IntTensor in({1, 1, 1});
  in.at(0, 0, 0) = 0;
  IntTensor one({1, 1, 1});
  one.at(0, 0, 0) = 1;
  spikes.push_back(unit.step(params, &in).at(0, 0, 0));
  spikes.push_back(unit.step(params, &one).at(0, 0, 0));
  spikes.push_back(unit.step(params, &in).at(0, 0, 0));
  spikes.push_back(unit.step(params, &one).at(0, 0, 0));
  CHECK(spikes == std::vector<int>{0, 1, 0, 1});
  CHECK_THROWS(unit.hold(one));
}

TEST_CASE("IF unit re-integrates the held encoding output") {
  const FixedFormat fmt;
  const std::vector<FoldedNeuronParams> params{{Fixed{0}, fmt.quantize(2.0), false}};
  IfUnit unit({1, 1, 1}, fmt, IfMode::kEncodingIterate);
  IntTensor conv({1, 1, 1});
  conv.at(0, 0, 0) = 1;
  unit.hold(conv);
  CHECK(unit.holding());
  std::vector<int> spikes;
  for (int t = 0; t < 4; ++t) spikes.push_back(unit.step(params).at(0, 0, 0));
  CHECK(spikes == std::vector<int>{0, 1, 0, 1});
}

TEST_CASE("if_unit_process subtracts the folded bias") {
  const FixedFormat fmt;
  const std::vector<FoldedNeuronParams> params{{fmt.quantize(0.5), fmt.quantize(1.0), false},
                                               {fmt.quantize(-2.0), fmt.quantize(1.0), false}};
  MembraneState m({2, 1, 1}, fmt);
  IntTensor conv({2, 1, 1});
  conv.at(0, 0, 0) = 1;
  conv.at(1, 0, 0) = -1;
  const SpikeMap s = if_unit_process(conv, params, m);
  CHECK(s.at(0, 0, 0) == 0);
  CHECK(m.potential(0, 0, 0) == fmt.quantize(0.5));
  CHECK(s.at(1, 0, 0) == 1);
}

TEST_CASE("peak throughput") {
  const HardwareConfig cfg;
  CHECK(cfg.pe_count() == 2304);
  CHECK(peak_gops(cfg) == doctest::Approx(2304.0));
  HardwareConfig one;
  one.pe_blocks = 1;
  one.arrays_per_block = 1;
  one.array_rows = 1;
  one.array_cols = 1;
  one.group_size = 1;
  one.clock_hz = 1e9;
  CHECK(peak_gops(one) == doctest::Approx(2.0));
  HardwareConfig mid;
  mid.pe_blocks = 16;
  mid.arrays_per_block = 1;
  mid.array_rows = 8;
  mid.array_cols = 1;
  mid.group_size = 16;
  mid.clock_hz = 2e8;
  CHECK(peak_gops(mid) == doctest::Approx(51.2));
}

TEST_CASE("hardware config JSON round trip and validation") {
  HardwareConfig cfg;
  cfg.array_rows = 6;
  cfg.sram.temp = 1234;
  cfg.clock_hz = 1e8;
  const nlohmann::json j = cfg;
  CHECK(j.get<HardwareConfig>() == cfg);
  CHECK(nlohmann::json::object().get<HardwareConfig>() == HardwareConfig{});
  HardwareConfig bad;
  bad.group_size = 64;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK(HardwareConfig{}.sram.total() == 235840);
}

TEST_CASE("engine matches the layer-by-layer oracle") {
  auto& rng = vsa::testing::rng_for(36);
  const char* nets[] = {"8Conv(encoding)-MP2-8Conv-4fc", "4Conv(encoding)-6Conv-MP2-5Conv{k=1,pad=0}-3fc",
                        "6Conv(encoding){k=3x2,pad=0}-4Conv{k=2x3}-2fc"};
  for (const char* text : nets) {
    const NetworkDescription net = parse_network(text);
    const Shape3 shape{uniform_int(rng, 1, 3), 12, 12};
    const ModelBundle b = generate_random_bundle(net, shape, rng());
    const ByteImage img = vsa::testing::random_image(rng, shape);
    const HardwareConfig cfg = small_config(uniform_int(rng, 3, 8), 4);
    const EngineRun run = run_network_engine(b, img, 4, cfg);
    const NetworkRun ref = run_network_oracle(b, img, 4);
    CHECK(run.layer_outputs == ref.layer_outputs);
    CHECK(run.class_counts == ref.class_counts);
    const auto est = estimate_network_cycles(b.validated(), 4, cfg);
    REQUIRE(est.size() == run.layers.size());
    for (std::size_t i = 0; i < est.size(); ++i) CHECK(est[i] == run.layers[i].cycles);
  }
}
