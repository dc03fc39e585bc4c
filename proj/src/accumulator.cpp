#include "vsa/accumulator.hpp"

#include <algorithm>
#include <string>

#include "vsa/errors.hpp"

namespace vsa::arch {

void accumulate_stage1(std::span<const std::span<const std::int32_t>> array_outputs, AccumulateMode mode,
                       int bitplane_index, std::span<std::int32_t> out) {
  if (mode == AccumulateMode::kEncoding && (bitplane_index < 0 || bitplane_index > 7)) {
    throw InvalidParameter("bitplane index must be in [0, 7]");
  }
  std::fill(out.begin(), out.end(), 0);
  for (const auto& a : array_outputs) {
    if (a.size() != out.size()) throw ShapeError("stage-1 inputs must have equal length");
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  }
  if (mode == AccumulateMode::kEncoding && bitplane_index > 0) {
    for (auto& v : out) v *= (1 << bitplane_index);
  }
}

PartialSums accumulate_stage1(const std::vector<PartialSums>& array_outputs, AccumulateMode mode, int bitplane_index) {
  if (array_outputs.empty()) return {};
  std::vector<std::span<const std::int32_t>> views(array_outputs.begin(), array_outputs.end());
  PartialSums out(array_outputs.front().size());
  accumulate_stage1(views, mode, bitplane_index, out);
  return out;
}

void tree_reduce(std::span<const std::span<const std::int32_t>> block_outputs, std::span<std::int32_t> out) {
  const std::size_t half = (block_outputs.size() + 1) / 2;
  auto partial = [&](std::size_t begin, std::size_t end, std::size_t i) {
    std::int32_t s = 0;
    for (std::size_t b = begin; b < end; ++b) s += block_outputs[b][i];
    return s;
  };
  for (const auto& b : block_outputs) {
    if (b.size() != out.size()) throw ShapeError("adder-tree inputs must have equal length");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = partial(0, half, i) + partial(half, block_outputs.size(), i);
  }
}

std::optional<PartialSums> GroupState::accumulate(std::span<const std::int32_t> group_sum, bool is_last_group) {
  if (complete_) throw ScheduleError("group accumulator already emitted its result");
  if (group_sum.size() != sum_.size()) throw ShapeError("group partial sum has the wrong length");
  for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += group_sum[i];
  ++groups_;
  if (!is_last_group) return std::nullopt;
  complete_ = true;
  return sum_;
}

const PartialSums& GroupState::result() const {
  if (!complete_) {
    throw ScheduleError("convolution output requested before the last channel group (" + std::to_string(groups_) +
                        " accumulated)");
  }
  return sum_;
}

std::optional<PartialSums> accumulate_tree(const std::vector<PartialSums>& block_outputs, GroupState& state,
                                           bool is_last_group, int max_blocks) {
  if (block_outputs.size() > static_cast<std::size_t>(max_blocks)) {
    throw ScheduleError("adder tree receives " + std::to_string(block_outputs.size()) + " blocks, capacity " +
                        std::to_string(max_blocks));
  }
  std::vector<std::span<const std::int32_t>> views(block_outputs.begin(), block_outputs.end());
  PartialSums reduced(block_outputs.empty() ? 0 : block_outputs.front().size());
  tree_reduce(views, reduced);
  return state.accumulate(reduced, is_last_group);
}

void TileBoundary::deposit(Key key, std::span<const std::int32_t> rows) {
  const auto [it, inserted] = entries_.try_emplace(key, rows.begin(), rows.end());
  if (!inserted) {
    throw ScheduleError("boundary entry for channel " + std::to_string(key.out_channel) + ", column " +
                        std::to_string(key.column) + ", tile " + std::to_string(key.tile) + " written twice");
  }
  values_ += rows.size();
  ++deposits_;
  peak_entries_ = std::max(peak_entries_, entries_.size());
  peak_values_ = std::max(peak_values_, values_);
}

PartialSums TileBoundary::consume(Key key) {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw ScheduleError("boundary entry for channel " + std::to_string(key.out_channel) + ", column " +
                        std::to_string(key.column) + ", tile " + std::to_string(key.tile) + " missing");
  }
  PartialSums rows = std::move(it->second);
  values_ -= rows.size();
  entries_.erase(it);
  return rows;
}

}  // namespace vsa::arch
