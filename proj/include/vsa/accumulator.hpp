#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

namespace vsa::arch {

enum class AccumulateMode { kSpiking, kEncoding };

using PartialSums = std::vector<std::int32_t>;

// Stage 1: element-wise sum of the arrays of one PE block. In encoding mode the
// block carries one bitplane and its sum is shifted left by bitplane_index.
void accumulate_stage1(std::span<const std::span<const std::int32_t>> array_outputs, AccumulateMode mode,
                       int bitplane_index, std::span<std::int32_t> out);
PartialSums accumulate_stage1(const std::vector<PartialSums>& array_outputs, AccumulateMode mode,
                              int bitplane_index = 0);

// Stage 2: adder tree over the PE blocks, split into two partial trees.
void tree_reduce(std::span<const std::span<const std::int32_t>> block_outputs, std::span<std::int32_t> out);

// Stage 3 state: running sum over sequential input-channel groups for one
// output vector position.
class GroupState {
 public:
  explicit GroupState(std::size_t length = 0) : sum_(length, 0) {}

  // Adds one group's partial vector; returns the finished vector on the last
  // group. Further groups after completion are rejected.
  std::optional<PartialSums> accumulate(std::span<const std::int32_t> group_sum, bool is_last_group);

  bool complete() const { return complete_; }
  int groups_seen() const { return groups_; }
  // Throws ScheduleError when the last group has not been accumulated yet.
  const PartialSums& result() const;

 private:
  PartialSums sum_;
  int groups_ = 0;
  bool complete_ = false;
};

// Stages 2 and 3 together: reduce up to max_blocks block vectors, then fold
// the result into the running group state.
std::optional<PartialSums> accumulate_tree(const std::vector<PartialSums>& block_outputs, GroupState& state,
                                           bool is_last_group, int max_blocks);

// Boundary SRAM: bottom partial rows of a tile waiting for the tile below.
class TileBoundary {
 public:
  struct Key {
    int out_channel;
    int column;
    int tile;
    auto operator<=>(const Key&) const = default;
  };

  void deposit(Key key, std::span<const std::int32_t> rows);
  // Removes and returns the rows deposited under key; each entry is consumed
  // exactly once.
  PartialSums consume(Key key);

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  std::size_t peak_entries() const { return peak_entries_; }
  std::size_t peak_values() const { return peak_values_; }
  std::uint64_t deposits() const { return deposits_; }

 private:
  std::map<Key, PartialSums> entries_;
  std::size_t values_ = 0;
  std::size_t peak_entries_ = 0;
  std::size_t peak_values_ = 0;
  std::uint64_t deposits_ = 0;
};

}  // namespace vsa::arch
