#include "vsa/pe_array.hpp"

#include <algorithm>

#include "vsa/errors.hpp"

namespace vsa::arch {

PeProduct pe_multiply(std::uint8_t spike, std::uint8_t weight_sign) {
  const std::uint8_t s = spike & 1u;
  const std::uint8_t w = weight_sign & 1u;
  const std::uint8_t high = s & w;
  const std::uint8_t bits = static_cast<std::uint8_t>((high << 1) | s);
  // Two-bit two's complement: 00 -> 0, 01 -> +1, 11 -> -1.
  const int value = static_cast<int>(s) - 2 * static_cast<int>(high);
  return {bits, value};
}

PEArrayState::PEArrayState(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0 || rows > 32) throw ConfigError("PE array must be 1..32 rows by at least 1 column");
  sums_.assign(static_cast<std::size_t>(rows + cols - 1), 0);
}

void PEArrayState::clear() { std::fill(sums_.begin(), sums_.end(), 0); }

void PEArrayState::cycle(std::uint32_t input_bits, std::span<const std::uint8_t> weight_signs) {
  if (weight_signs.size() > static_cast<std::size_t>(cols_)) throw ScheduleError("weight column wider than the PE array");
  const int taps = static_cast<int>(weight_signs.size());
  for (int r = 0; r < rows_ && input_bits; ++r, input_bits >>= 1) {
    if (!(input_bits & 1u)) continue;
    std::int32_t* diag = sums_.data() + r;
    for (int k = 0; k < taps; ++k) diag[k] += pe_multiply(1, weight_signs[static_cast<std::size_t>(k)]).value;
  }
}

std::vector<std::int32_t> pe_array_cycle(PEArrayState& state, std::span<const std::uint8_t> input_col,
                                         std::span<const std::uint8_t> weight_col) {
  if (input_col.size() != static_cast<std::size_t>(state.rows())) throw ScheduleError("input column height mismatch");
  std::uint32_t bits = 0;
  for (std::size_t r = 0; r < input_col.size(); ++r) bits |= static_cast<std::uint32_t>(input_col[r] & 1u) << r;
  state.clear();
  state.cycle(bits, weight_col);
  return {state.partial_sums().begin(), state.partial_sums().end()};
}

}  // namespace vsa::arch
