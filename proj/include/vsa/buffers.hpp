#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vsa/hardware_config.hpp"
#include "vsa/network.hpp"
#include "vsa/tensor.hpp"
#include "vsa/traffic.hpp"

namespace vsa::mem {

enum class BufferRole { kSpikeA, kSpikeB, kWeightA, kWeightB, kMembrane1, kMembrane2, kTemp, kBoundary };

const char* to_string(BufferRole role);

// One on-chip SRAM holding named entries. Occupancy above capacity is
// reported (allocate returns false) rather than truncated.
class BufferModel {
 public:
  BufferModel(BufferRole role, std::uint64_t capacity);

  BufferRole role() const { return role_; }
  std::string name() const { return to_string(role_); }
  std::uint64_t capacity() const { return capacity_; }
  std::uint64_t occupancy() const { return occupancy_; }
  std::uint64_t peak() const { return peak_; }
  std::uint64_t bytes_read() const { return bytes_read_; }
  std::uint64_t bytes_written() const { return bytes_written_; }
  std::uint64_t reads() const { return reads_; }
  std::uint64_t writes() const { return writes_; }

  bool allocate(const std::string& key, std::uint64_t bytes);
  void release(const std::string& key);
  bool contains(const std::string& key) const { return entries_.count(key) != 0; }

  // Marks the entry written; payload replaces any earlier one when given.
  // Returns false if the entry was never allocated.
  bool write(const std::string& key, std::uint64_t bytes, std::optional<SpikeMap> payload = std::nullopt);
  // nullptr when the entry is missing or has not been written yet.
  const std::optional<SpikeMap>* read(const std::string& key, std::uint64_t bytes);

 private:
  struct Entry {
    std::uint64_t bytes = 0;
    bool written = false;
    std::optional<SpikeMap> payload;
  };

  BufferRole role_;
  std::uint64_t capacity_;
  std::uint64_t occupancy_ = 0;
  std::uint64_t peak_ = 0;
  std::uint64_t bytes_read_ = 0;
  std::uint64_t bytes_written_ = 0;
  std::uint64_t reads_ = 0;
  std::uint64_t writes_ = 0;
  std::map<std::string, Entry> entries_;
};

enum class TraceOp { kDramRead, kDramWrite, kAllocate, kWrite, kRead, kRelease };
const char* to_string(TraceOp op);

struct TraceEvent {
  TraceOp op;
  BufferRole buffer;
  int stage = 0;
  int step = -1;     // time step, -1 when not per step
  int channel = -1;  // output channel, -1 when not per channel
  std::uint64_t bytes = 0;
  std::string key;
};

enum class FaultKind { kCapacity, kReadBeforeWrite, kDataMismatch };
const char* to_string(FaultKind kind);

struct BufferFault {
  FaultKind kind;
  BufferRole buffer;
  int stage = 0;
  std::string detail;
};

struct PingPongTrace {
  std::vector<TraceEvent> events;
  std::vector<BufferModel> buffers;
  std::vector<BufferFault> faults;  // first occurrence per (kind, buffer, stage)
  std::uint64_t dram_read_bytes = 0;
  std::uint64_t dram_write_bytes = 0;
  std::uint64_t event_count = 0;

  bool ok() const { return faults.empty(); }
  std::size_t count(FaultKind kind) const;
  std::uint64_t dram_total() const { return dram_read_bytes + dram_write_bytes; }
};

struct PingPongOptions {
  bool record_events = true;
  // Per network layer: spikes written into the buffers, and the reference the
  // consumer compares them against on read. Payload checks are skipped when
  // either is null.
  const std::vector<SpikeTrain>* produced = nullptr;
  const std::vector<SpikeTrain>* expected = nullptr;
};

// Tick-batched buffer schedule. Per stage: weights into weight[stage % 2], all
// T input maps resident with step t in spike[t % 2], output channels outer and
// time steps inner, one channel plane of potentials in membrane SRAM. A fused
// producer writes its maps to temp; its consumer's outputs take over the
// producer's freed spike-buffer entries.
PingPongTrace pingpong_schedule(const ValidatedNetwork& net, const FusionPlan& plan, int time_steps,
                                const HardwareConfig& cfg, const PingPongOptions& options = {});

}  // namespace vsa::mem
