#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace vsa::arch {

// Product of a spike and a sign-bit weight as the PE emits it: a two-bit
// two's-complement value {high: s AND w, low: s}.
struct PeProduct {
  std::uint8_t bits = 0;  // bit 1 = high, bit 0 = low
  int value = 0;          // decoded -1, 0 or +1
};

PeProduct pe_multiply(std::uint8_t spike, std::uint8_t weight_sign);

// One R x K PE array. Inputs broadcast along rows, weights along columns, and
// products are summed along the diagonal into R + K - 1 registers.
class PEArrayState {
 public:
  PEArrayState(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::span<const std::int32_t> partial_sums() const { return sums_; }
  void clear();

  // Adds input[r] * weight[k] into register r + k. input_bits holds the R
  // input spikes (bit r = row r); weight_signs holds up to K sign bits, and
  // PE columns beyond weight_signs.size() stay idle.
  void cycle(std::uint32_t input_bits, std::span<const std::uint8_t> weight_signs);

 private:
  int rows_;
  int cols_;
  std::vector<std::int32_t> sums_;
};

// Single-shot form: runs one cycle on a cleared array and returns the
// R + K - 1 diagonal sums. input_col has R entries, weight_col K sign bits.
std::vector<std::int32_t> pe_array_cycle(PEArrayState& state, std::span<const std::uint8_t> input_col,
                                         std::span<const std::uint8_t> weight_col);

}  // namespace vsa::arch
