#include "vsa/scheduler.hpp"

#include <algorithm>
#include <span>
#include <string>

#include "vsa/accumulator.hpp"
#include "vsa/errors.hpp"
#include "vsa/pe_array.hpp"

namespace vsa::arch {

double CycleReport::utilization() const {
  return total_pe_cycles ? static_cast<double>(active_pe_cycles) / static_cast<double>(total_pe_cycles) : 0.0;
}

double CycleReport::steady_utilization() const {
  const std::uint64_t denom = steady_cycles * pe_count;
  return denom ? static_cast<double>(active_pe_cycles) / static_cast<double>(denom) : 0.0;
}

double CycleReport::seconds() const { return clock_hz > 0 ? static_cast<double>(total_cycles) / clock_hz : 0.0; }

double CycleReport::achieved_gops() const {
  const double s = seconds();
  return s > 0 ? static_cast<double>(achieved_ops()) / s / 1e9 : 0.0;
}

CycleReport& CycleReport::operator+=(const CycleReport& o) {
  total_cycles += o.total_cycles;
  warmup_cycles += o.warmup_cycles;
  steady_cycles += o.steady_cycles;
  accumulator_latency_cycles += o.accumulator_latency_cycles;
  passes += o.passes;
  active_pe_cycles += o.active_pe_cycles;
  total_pe_cycles += o.total_pe_cycles;
  if (pe_count == 0) pe_count = o.pe_count;
  if (clock_hz == 0.0) clock_hz = o.clock_hz;
  return *this;
}

double peak_gops(const HardwareConfig& cfg) {
  return static_cast<double>(cfg.pe_count()) * 2.0 * cfg.clock_hz / 1e9;
}

int channels_per_pass(const HardwareConfig& cfg, bool encoding) {
  if (!encoding) return cfg.group_size;
  if (cfg.pe_blocks < 8) throw ConfigError("the encoding layer needs at least 8 PE blocks");
  return cfg.pe_blocks / 8;
}

namespace {

struct Geometry {
  int in_channels, height, width;
  int out_channels, kh, kw;
  int out_h, out_w;
  int tiles;
  int per_pass;   // input channels per group
  int groups;
  int lanes;      // PE blocks per input channel
};

Geometry make_geometry(Shape3 in, int out_channels, int kh, int kw, bool encoding, const HardwareConfig& cfg) {
  cfg.validate();
  if (kw > cfg.arrays_per_block) {
    throw ConfigError("kernel width " + std::to_string(kw) + " exceeds " + std::to_string(cfg.arrays_per_block) +
                      " arrays per block");
  }
  if (kh > cfg.array_cols) {
    throw ConfigError("kernel height " + std::to_string(kh) + " exceeds " + std::to_string(cfg.array_cols) +
                      " PE array columns");
  }
  if (kh <= 0 || kw <= 0 || out_channels <= 0) throw ShapeError("kernel and output channels must be positive");
  if (!in.positive()) throw ShapeError("empty conv input " + in.str());
  Geometry g{};
  g.in_channels = in.channels;
  g.height = in.height;
  g.width = in.width;
  g.out_channels = out_channels;
  g.kh = kh;
  g.kw = kw;
  g.out_h = in.height - kh + 1;
  g.out_w = in.width - kw + 1;
  if (g.out_h <= 0 || g.out_w <= 0) throw ShapeError("kernel does not fit the input " + in.str());
  g.tiles = (in.height + cfg.array_rows - 1) / cfg.array_rows;
  g.per_pass = channels_per_pass(cfg, encoding);
  g.groups = (in.channels + g.per_pass - 1) / g.per_pass;
  g.lanes = encoding ? 8 : 1;
  return g;
}

int rows_in_tile(const Geometry& g, int tile, int r) { return std::min(r, g.height - tile * r); }

// Cycle and PE accounting of one (output channel, group) pass.
void account_pass(CycleReport& rep, const Geometry& g, int group, const HardwareConfig& cfg) {
  const int channels = std::min(g.per_pass, g.in_channels - group * g.per_pass);
  const std::uint64_t blocks = static_cast<std::uint64_t>(channels) * g.lanes;
  const std::uint64_t warm = static_cast<std::uint64_t>(g.kw - 1);
  const std::uint64_t steady = static_cast<std::uint64_t>(g.tiles) * g.out_w;
  std::uint64_t active = 0;
  for (int j = 0; j < g.tiles; ++j) {
    active += static_cast<std::uint64_t>(g.out_w) * blocks * g.kw * rows_in_tile(g, j, cfg.array_rows) * g.kh;
  }
  rep.warmup_cycles += warm;
  rep.steady_cycles += steady;
  rep.total_cycles += warm + steady;
  rep.accumulator_latency_cycles += static_cast<std::uint64_t>(cfg.accumulator_stages);
  rep.passes += 1;
  rep.active_pe_cycles += active;
  rep.total_pe_cycles += (warm + steady) * static_cast<std::uint64_t>(cfg.pe_count());
}

CycleReport empty_report(const HardwareConfig& cfg) {
  CycleReport rep;
  rep.pe_count = static_cast<std::uint64_t>(cfg.pe_count());
  rep.clock_hz = cfg.clock_hz;
  return rep;
}

// masks[((c * lanes + lane) * width + x) * tiles + j] holds the R input bits
// of column x in tile j (bit r = row j*R + r).
ConvSchedule run_schedule(const Geometry& g, const std::vector<std::uint32_t>& masks,
                          const BinaryWeightTensor& w, const HardwareConfig& cfg, bool record_trace) {
  const int R = cfg.array_rows;
  const int len = R + cfg.array_cols - 1;  // every diagonal register of the array
  const int seam = g.kh - 1;
  const AccumulateMode mode = g.lanes == 8 ? AccumulateMode::kEncoding : AccumulateMode::kSpiking;

  ConvSchedule result;
  result.output = IntTensor({g.out_channels, g.out_h, g.out_w});
  result.cycles = empty_report(cfg);

  std::vector<PEArrayState> arrays(static_cast<std::size_t>(g.kw), PEArrayState(R, cfg.array_cols));
  std::vector<std::span<const std::int32_t>> array_views(static_cast<std::size_t>(g.kw));
  const std::size_t max_blocks = static_cast<std::size_t>(g.per_pass) * g.lanes;
  std::vector<PartialSums> block_out(max_blocks, PartialSums(static_cast<std::size_t>(len)));
  std::vector<std::span<const std::int32_t>> block_views;
  PartialSums column(static_cast<std::size_t>(len));
  // wcols[(c * kw + a) * kh + k]: kernel column a, reversed so register d maps
  // to full-convolution row tile*R + d.
  std::vector<std::uint8_t> wcols(static_cast<std::size_t>(g.in_channels) * g.kw * g.kh);
  TileBoundary boundary;
  std::uint64_t cycle = 0;

  for (int oc = 0; oc < g.out_channels; ++oc) {
    for (int c = 0; c < g.in_channels; ++c)
      for (int a = 0; a < g.kw; ++a)
        for (int k = 0; k < g.kh; ++k)
          wcols[(static_cast<std::size_t>(c) * g.kw + a) * g.kh + k] = w.sign(oc, c, g.kh - 1 - k, a);

    std::vector<GroupState> groups(static_cast<std::size_t>(g.tiles) * g.out_w, GroupState(static_cast<std::size_t>(R)));
    for (int grp = 0; grp < g.groups; ++grp) {
      const int c0 = grp * g.per_pass;
      const int channels = std::min(g.per_pass, g.in_channels - c0);
      const std::size_t blocks = static_cast<std::size_t>(channels) * g.lanes;
      const bool last_group = grp + 1 == g.groups;
      cycle += static_cast<std::uint64_t>(g.kw - 1);
      account_pass(result.cycles, g, grp, cfg);

      for (int j = 0; j < g.tiles; ++j) {
        for (int x = 0; x < g.out_w; ++x) {
          block_views.clear();
          for (std::size_t b = 0; b < blocks; ++b) {
            const int c = c0 + static_cast<int>(b) / g.lanes;
            const int lane = static_cast<int>(b) % g.lanes;
            for (int a = 0; a < g.kw; ++a) {
              const std::size_t mi =
                  ((static_cast<std::size_t>(c) * g.lanes + lane) * g.width + (x + a)) * g.tiles + j;
              auto& pe = arrays[static_cast<std::size_t>(a)];
              pe.clear();
              pe.cycle(masks[mi], std::span<const std::uint8_t>(
                                      wcols.data() + (static_cast<std::size_t>(c) * g.kw + a) * g.kh, g.kh));
              array_views[static_cast<std::size_t>(a)] = pe.partial_sums();
            }
            accumulate_stage1(array_views, mode, lane, block_out[b]);
            block_views.emplace_back(block_out[b]);
          }
          tree_reduce(block_views, column);
          ++cycle;
          if (record_trace) result.trace.push_back({cycle, oc, grp, j, x, column});

          if (j > 0 && seam > 0) {
            const PartialSums carry = boundary.consume({oc, x, j});
            for (int d = 0; d < seam; ++d) column[static_cast<std::size_t>(d)] += carry[static_cast<std::size_t>(d)];
          }
          if (j + 1 < g.tiles && seam > 0) {
            boundary.deposit({oc, x, j + 1}, std::span<const std::int32_t>(column).subspan(static_cast<std::size_t>(R),
                                                                                   static_cast<std::size_t>(seam)));
          }
          auto done = groups[static_cast<std::size_t>(j) * g.out_w + x].accumulate(
              std::span<const std::int32_t>(column).first(static_cast<std::size_t>(R)), last_group);
          if (!done) continue;
          for (int d = 0; d < R; ++d) {
            const int y = j * R + d - seam;
            if (y >= 0 && y < g.out_h) result.output.at(oc, y, x) = (*done)[static_cast<std::size_t>(d)];
          }
        }
      }
      if (!boundary.empty()) throw ScheduleError("boundary entries left after a channel group");
    }
  }
  result.boundary.deposits = boundary.deposits();
  result.boundary.peak_entries = boundary.peak_entries();
  result.boundary.peak_values = boundary.peak_values();
  result.boundary.peak_bytes = static_cast<std::uint64_t>(boundary.peak_values()) * cfg.boundary_entry_bytes;
  return result;
}

void check_weights(const Geometry& g, const BinaryWeightTensor& w) {
  if (w.in_channels() != g.in_channels) {
    throw ShapeError("weights expect " + std::to_string(w.in_channels()) + " input channels, input has " +
                     std::to_string(g.in_channels));
  }
}

}  // namespace

ConvSchedule schedule_conv_layer(const SpikeMap& padded_input, const BinaryWeightTensor& weights,
                                 const HardwareConfig& cfg, bool record_trace) {
  const Shape3 in = padded_input.shape();
  const Geometry g = make_geometry(in, weights.out_channels(), weights.kernel_h(), weights.kernel_w(), false, cfg);
  check_weights(g, weights);
  const int R = cfg.array_rows;
  std::vector<std::uint32_t> masks(static_cast<std::size_t>(in.channels) * in.width * g.tiles, 0);
  for (int c = 0; c < in.channels; ++c)
    for (int y = 0; y < in.height; ++y)
      for (int x = 0; x < in.width; ++x)
        if (padded_input.at(c, y, x))
          masks[(static_cast<std::size_t>(c) * in.width + x) * g.tiles + y / R] |= 1u << (y % R);
  return run_schedule(g, masks, weights, cfg, record_trace);
}

ConvSchedule schedule_encoding_layer(const ByteImage& padded_input, const BinaryWeightTensor& weights,
                                     const HardwareConfig& cfg, bool record_trace) {
  const Shape3 in = padded_input.shape();
  const Geometry g = make_geometry(in, weights.out_channels(), weights.kernel_h(), weights.kernel_w(), true, cfg);
  check_weights(g, weights);
  const int R = cfg.array_rows;
  std::vector<std::uint32_t> masks(static_cast<std::size_t>(in.channels) * 8 * in.width * g.tiles, 0);
  for (int c = 0; c < in.channels; ++c)
    for (int y = 0; y < in.height; ++y)
      for (int x = 0; x < in.width; ++x) {
        const std::uint8_t v = padded_input.at(c, y, x);
        for (int b = 0; b < 8; ++b)
          if ((v >> b) & 1u)
            masks[((static_cast<std::size_t>(c) * 8 + b) * in.width + x) * g.tiles + y / R] |= 1u << (y % R);
      }
  return run_schedule(g, masks, weights, cfg, record_trace);
}

CycleReport estimate_conv_cycles(Shape3 padded_input, int out_channels, int kernel_h, int kernel_w, bool encoding,
                                 const HardwareConfig& cfg) {
  const Geometry g = make_geometry(padded_input, out_channels, kernel_h, kernel_w, encoding, cfg);
  CycleReport rep = empty_report(cfg);
  for (int oc = 0; oc < g.out_channels; ++oc)
    for (int grp = 0; grp < g.groups; ++grp) account_pass(rep, g, grp, cfg);
  return rep;
}

}  // namespace vsa::arch
