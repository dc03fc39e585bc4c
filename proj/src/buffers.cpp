#include "vsa/buffers.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "vsa/errors.hpp"

namespace vsa::mem {

const char* to_string(BufferRole role) {
  switch (role) {
    case BufferRole::kSpikeA: return "spike-A";
    case BufferRole::kSpikeB: return "spike-B";
    case BufferRole::kWeightA: return "weight-A";
    case BufferRole::kWeightB: return "weight-B";
    case BufferRole::kMembrane1: return "membrane-1";
    case BufferRole::kMembrane2: return "membrane-2";
    case BufferRole::kTemp: return "temp";
    case BufferRole::kBoundary: return "boundary";
  }
  return "?";
}

const char* to_string(TraceOp op) {
  switch (op) {
    case TraceOp::kDramRead: return "dram_read";
    case TraceOp::kDramWrite: return "dram_write";
    case TraceOp::kAllocate: return "allocate";
    case TraceOp::kWrite: return "write";
    case TraceOp::kRead: return "read";
    case TraceOp::kRelease: return "release";
  }
  return "?";
}

const char* to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::kCapacity: return "capacity";
    case FaultKind::kReadBeforeWrite: return "read-before-write";
    case FaultKind::kDataMismatch: return "data-mismatch";
  }
  return "?";
}

BufferModel::BufferModel(BufferRole role, std::uint64_t capacity) : role_(role), capacity_(capacity) {}

bool BufferModel::allocate(const std::string& key, std::uint64_t bytes) {
  auto [it, inserted] = entries_.try_emplace(key);
  if (!inserted) throw ScheduleError(name() + " entry " + key + " allocated twice");
  it->second.bytes = bytes;
  occupancy_ += bytes;
  peak_ = std::max(peak_, occupancy_);
  return occupancy_ <= capacity_;
}

void BufferModel::release(const std::string& key) {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ScheduleError(name() + " entry " + key + " released but not held");
  occupancy_ -= it->second.bytes;
  entries_.erase(it);
}

bool BufferModel::write(const std::string& key, std::uint64_t bytes, std::optional<SpikeMap> payload) {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return false;
  it->second.written = true;
  if (payload) it->second.payload = std::move(payload);
  bytes_written_ += bytes;
  ++writes_;
  return true;
}

const std::optional<SpikeMap>* BufferModel::read(const std::string& key, std::uint64_t bytes) {
  const auto it = entries_.find(key);
  if (it == entries_.end() || !it->second.written) return nullptr;
  bytes_read_ += bytes;
  ++reads_;
  return &it->second.payload;
}

std::size_t PingPongTrace::count(FaultKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(faults.begin(), faults.end(), [&](const BufferFault& f) { return f.kind == kind; }));
}

namespace {

std::string key(int stage, const char* what, int step = -1) {
  std::string k = "S" + std::to_string(stage) + " " + what;
  if (step >= 0) k += " t" + std::to_string(step);
  return k;
}

class Simulator {
 public:
  Simulator(const ValidatedNetwork& net, const HardwareConfig& cfg, int time_steps, const PingPongOptions& opts)
      : net_(net), cfg_(cfg), T_(time_steps), opts_(opts), stages_(compute_stages(net)) {
    const SramCapacities& s = cfg.sram;
    trace_.buffers = {BufferModel(BufferRole::kSpikeA, s.spike_each),   BufferModel(BufferRole::kSpikeB, s.spike_each),
                      BufferModel(BufferRole::kWeightA, s.weight_each), BufferModel(BufferRole::kWeightB, s.weight_each),
                      BufferModel(BufferRole::kMembrane1, s.membrane_each),
                      BufferModel(BufferRole::kMembrane2, s.membrane_each), BufferModel(BufferRole::kTemp, s.temp),
                      BufferModel(BufferRole::kBoundary, s.boundary)};
  }

  PingPongTrace run(const FusionPlan& plan) {
    for (const auto& g : plan.groups) {
      if (g.size() == 2) {
        load_weights(stage(g[0]));
        load_weights(stage(g[1]));
        run_stage(stage(g[0]), false, true);
        run_stage(stage(g[1]), true, false);
        release_weights(stage(g[0]));
        release_weights(stage(g[1]));
      } else {
        load_weights(stage(g[0]));
        run_stage(stage(g[0]), false, false);
        release_weights(stage(g[0]));
      }
    }
    check_final_outputs();
    return std::move(trace_);
  }

 private:
  const ComputeStage& stage(int i) const { return stages_.at(static_cast<std::size_t>(i)); }
  BufferModel& buf(BufferRole r) { return trace_.buffers[static_cast<std::size_t>(r)]; }
  static BufferRole spike_buffer(int t) { return t % 2 ? BufferRole::kSpikeB : BufferRole::kSpikeA; }
  static BufferRole weight_buffer(int s) { return s % 2 ? BufferRole::kWeightB : BufferRole::kWeightA; }

  void event(TraceOp op, BufferRole r, int stage, int step, int channel, std::uint64_t bytes, const std::string& k) {
    ++trace_.event_count;
    if (opts_.record_events) trace_.events.push_back({op, r, stage, step, channel, bytes, k});
  }

  void fault(FaultKind kind, BufferRole r, int stage, const std::string& detail) {
    if (!reported_.insert({kind, r, stage}).second) return;
    trace_.faults.push_back({kind, r, stage, detail});
  }

  void allocate(BufferRole r, int stage, const std::string& k, std::uint64_t bytes) {
    event(TraceOp::kAllocate, r, stage, -1, -1, bytes, k);
    if (!buf(r).allocate(k, bytes)) {
      fault(FaultKind::kCapacity, r, stage,
            k + " needs occupancy " + std::to_string(buf(r).occupancy()) + " B, capacity " +
                std::to_string(buf(r).capacity()) + " B");
    }
  }

  void release(BufferRole r, int stage, const std::string& k) {
    event(TraceOp::kRelease, r, stage, -1, -1, 0, k);
    buf(r).release(k);
  }

  void write(BufferRole r, int stage, int step, int channel, const std::string& k, std::uint64_t bytes,
             std::optional<SpikeMap> payload = std::nullopt) {
    event(TraceOp::kWrite, r, stage, step, channel, bytes, k);
    if (!buf(r).write(k, bytes, std::move(payload))) {
      fault(FaultKind::kReadBeforeWrite, r, stage, "write to unallocated entry " + k);
    }
  }

  const std::optional<SpikeMap>* read(BufferRole r, int stage, int step, int channel, const std::string& k,
                                      std::uint64_t bytes) {
    event(TraceOp::kRead, r, stage, step, channel, bytes, k);
    const auto* p = buf(r).read(k, bytes);
    if (!p) fault(FaultKind::kReadBeforeWrite, r, stage, "read of unwritten entry " + k);
    return p;
  }

  void dram_read(BufferRole r, int stage, int step, const std::string& k, std::uint64_t bytes) {
    event(TraceOp::kDramRead, r, stage, step, -1, bytes, k);
    trace_.dram_read_bytes += bytes;
  }

  void dram_write(BufferRole r, int stage, int step, const std::string& k, std::uint64_t bytes) {
    event(TraceOp::kDramWrite, r, stage, step, -1, bytes, k);
    trace_.dram_write_bytes += bytes;
  }

  bool checking() const { return opts_.produced && opts_.expected; }

  std::optional<SpikeMap> produced(const ComputeStage& s, int t) const {
    if (!checking()) return std::nullopt;
    return opts_.produced->at(static_cast<std::size_t>(s.last_layer())).step(t);
  }

  void compare(const std::optional<SpikeMap>* got, int layer, int stage, int t, BufferRole r) {
    if (!checking() || !got) return;
    const SpikeMap& want = opts_.expected->at(static_cast<std::size_t>(layer)).step(t);
    if (!got->has_value() || !(**got == want)) {
      fault(FaultKind::kDataMismatch, r, stage,
            "layer " + std::to_string(layer) + " step " + std::to_string(t) + " differs from the reference");
    }
  }

  std::uint64_t per_channel_weight_bytes(const AnnotatedLayer& l) const {
    const std::uint64_t bits = static_cast<std::uint64_t>(l.compute_input().channels) * l.spec.kernel_h * l.spec.kernel_w;
    return (bits + 7) / 8 + 2 * static_cast<std::uint64_t>(cfg_.format.storage_bytes());
  }

  // Weights stay resident for the whole stage when they fit one half;
  // otherwise they stream in output-channel slices during the stage.
  void load_weights(const ComputeStage& s) {
    const AnnotatedLayer& l = net_.layers[static_cast<std::size_t>(s.layer)];
    const std::uint64_t bytes = weight_bytes(l, cfg_.format);
    const BufferRole r = weight_buffer(s.index);
    if (bytes <= buf(r).capacity()) {
      allocate(r, s.index, key(s.index, "weights"), bytes);
      dram_read(r, s.index, -1, key(s.index, "weights"), bytes);
      write(r, s.index, -1, -1, key(s.index, "weights"), bytes);
      return;
    }
    const std::uint64_t per_oc = per_channel_weight_bytes(l);
    std::uint64_t per_slice = buf(r).capacity() / per_oc;
    if (per_slice == 0) {
      fault(FaultKind::kCapacity, r, s.index,
            "one output channel needs " + std::to_string(per_oc) + " weight bytes, capacity " +
                std::to_string(buf(r).capacity()) + " B");
      per_slice = 1;
    }
    sliced_[s.index] = {per_slice, bytes};
  }

  // Loads the slice holding output channel oc when the stage streams weights.
  void stream_weights(const ComputeStage& s, int oc) {
    const auto it = sliced_.find(s.index);
    if (it == sliced_.end()) return;
    auto& [per_slice, remaining] = it->second;
    if (static_cast<std::uint64_t>(oc) % per_slice != 0) return;
    const BufferRole r = weight_buffer(s.index);
    const std::string k = key(s.index, "weight slice");
    if (oc > 0) release(r, s.index, k);
    const AnnotatedLayer& l = net_.layers[static_cast<std::size_t>(s.layer)];
    const std::uint64_t left_oc = static_cast<std::uint64_t>(l.spec.out_channels - oc);
    const std::uint64_t bytes = left_oc <= per_slice ? remaining : std::min(remaining, per_slice * per_channel_weight_bytes(l));
    remaining -= bytes;
    allocate(r, s.index, k, bytes);
    dram_read(r, s.index, -1, k, bytes);
    write(r, s.index, -1, oc, k, bytes);
  }

  void release_weights(const ComputeStage& s) {
    const BufferRole r = weight_buffer(s.index);
    if (sliced_.count(s.index)) {
      release(r, s.index, key(s.index, "weight slice"));
      sliced_.erase(s.index);
    } else {
      release(r, s.index, key(s.index, "weights"));
    }
  }

  void run_stage(const ComputeStage& s, bool fed_on_chip, bool feeds_on_chip) {
    const AnnotatedLayer& l = net_.layers[static_cast<std::size_t>(s.layer)];
    const int id = s.index;
    const std::uint64_t in_step = spike_map_bytes(s.input, 1);
    const std::uint64_t out_step = spike_map_bytes(s.output, 1);
    const std::uint64_t plane_cells = static_cast<std::uint64_t>(s.conv_output.height) * s.conv_output.width;
    const std::uint64_t plane_bytes = plane_cells * static_cast<std::uint64_t>(cfg_.format.storage_bytes());
    const std::uint64_t out_plane = (static_cast<std::uint64_t>(s.output.height) * s.output.width + 7) / 8;

    // Inputs.
    const std::string image = key(id, "image");
    if (s.encoding) {
      allocate(BufferRole::kSpikeA, id, image, s.input.count());
      dram_read(BufferRole::kSpikeA, id, -1, image, s.input.count());
      write(BufferRole::kSpikeA, id, -1, -1, image, s.input.count());
    } else if (!fed_on_chip) {
      for (int t = 0; t < T_; ++t) {
        const std::string k = key(id, "in", t);
        allocate(spike_buffer(t), id, k, in_step);
        dram_read(spike_buffer(t), id, t, k, in_step);
        std::optional<SpikeMap> payload;
        if (checking()) {
          const auto it = dram_.find(key(id - 1, "out", t));
          if (it == dram_.end()) {
            fault(FaultKind::kReadBeforeWrite, spike_buffer(t), id, "DRAM map " + key(id - 1, "out", t) + " not written");
          } else {
            payload = it->second;
          }
        }
        write(spike_buffer(t), id, t, -1, k, in_step, std::move(payload));
      }
    }
    auto input_location = [&](int t) {
      return fed_on_chip ? std::pair{BufferRole::kTemp, key(id - 1, "out", t)} : std::pair{spike_buffer(t), key(id, "in", t)};
    };

    // Working state.
    const BufferRole potential = fed_on_chip ? BufferRole::kMembrane2 : BufferRole::kMembrane1;
    allocate(potential, id, key(id, "potential"), plane_bytes);
    if (s.encoding) allocate(BufferRole::kMembrane2, id, key(id, "conv"), plane_bytes);
    const int tiles = (s.input.height + 2 * l.spec.padding + cfg_.array_rows - 1) / cfg_.array_rows;
    const bool seams = !s.fully_connected && tiles > 1 && l.spec.kernel_h > 1;
    if (seams) {
      allocate(BufferRole::kBoundary, id, key(id, "seams"),
               static_cast<std::uint64_t>(s.conv_output.width) * (l.spec.kernel_h - 1) * cfg_.boundary_entry_bytes);
    }
    for (int t = 0; t < T_; ++t) {
      const BufferRole r = feeds_on_chip ? BufferRole::kTemp : spike_buffer(t);
      allocate(r, id, key(id, "out", t), out_step);
    }

    // Output channels outer, time steps inner.
    for (int oc = 0; oc < l.spec.out_channels; ++oc) {
      stream_weights(s, oc);
      if (s.encoding) {
        read(BufferRole::kSpikeA, id, -1, oc, image, s.input.count());
        write(BufferRole::kMembrane2, id, -1, oc, key(id, "conv"), plane_bytes);
      }
      const bool last = oc + 1 == l.spec.out_channels;
      for (int t = 0; t < T_; ++t) {
        if (s.encoding) {
          read(BufferRole::kMembrane2, id, t, oc, key(id, "conv"), plane_bytes);
        } else {
          const auto [r, k] = input_location(t);
          const auto* got = read(r, id, t, oc, k, in_step);
          if (oc == 0) compare(got, stage(id - 1).last_layer(), id, t, r);
        }
        if (t > 0) read(potential, id, t, oc, key(id, "potential"), plane_bytes);
        write(potential, id, t, oc, key(id, "potential"), plane_bytes);
        const BufferRole out = feeds_on_chip ? BufferRole::kTemp : spike_buffer(t);
        write(out, id, t, oc, key(id, "out", t), out_plane, last ? produced(s, t) : std::nullopt);
      }
    }

    // Outputs leave the chip unless the fused successor consumes them.
    if (!feeds_on_chip) {
      for (int t = 0; t < T_; ++t) {
        const std::string k = key(id, "out", t);
        const auto* got = read(spike_buffer(t), id, t, -1, k, out_step);
        dram_write(spike_buffer(t), id, t, k, out_step);
        if (got && got->has_value()) dram_[k] = **got;
        release(spike_buffer(t), id, k);
      }
    }

    if (s.encoding) {
      release(BufferRole::kSpikeA, id, image);
      release(BufferRole::kMembrane2, id, key(id, "conv"));
    } else {
      for (int t = 0; t < T_; ++t) {
        const auto [r, k] = input_location(t);
        release(r, id, k);
      }
    }
    release(potential, id, key(id, "potential"));
    if (seams) release(BufferRole::kBoundary, id, key(id, "seams"));
  }

  void check_final_outputs() {
    if (!checking() || stages_.empty()) return;
    const ComputeStage& last = stages_.back();
    for (int t = 0; t < T_; ++t) {
      const auto it = dram_.find(key(last.index, "out", t));
      const std::optional<SpikeMap> got = it == dram_.end() ? std::nullopt : std::optional<SpikeMap>(it->second);
      compare(&got, last.last_layer(), last.index, t, spike_buffer(t));
    }
  }

  const ValidatedNetwork& net_;
  const HardwareConfig& cfg_;
  int T_;
  const PingPongOptions& opts_;
  std::vector<ComputeStage> stages_;
  PingPongTrace trace_;
  std::set<std::tuple<FaultKind, BufferRole, int>> reported_;
  std::map<std::string, SpikeMap> dram_;
  std::map<int, std::pair<std::uint64_t, std::uint64_t>> sliced_;  // stage -> (channels per slice, bytes left)
};

}  // namespace

PingPongTrace pingpong_schedule(const ValidatedNetwork& net, const FusionPlan& plan, int time_steps,
                                const HardwareConfig& cfg, const PingPongOptions& options) {
  if (time_steps <= 0) throw InvalidParameter("time steps must be positive");
  cfg.validate();
  validate_plan(plan, net, cfg);
  if (options.produced && options.produced->size() != net.layers.size()) {
    throw ShapeError("produced spikes do not cover every layer");
  }
  if (options.expected && options.expected->size() != net.layers.size()) {
    throw ShapeError("reference spikes do not cover every layer");
  }
  Simulator sim(net, cfg, time_steps, options);
  return sim.run(plan);
}

}  // namespace vsa::mem
