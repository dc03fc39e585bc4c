#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace vsa {

// Raw two's-complement fixed-point value. The scale lives in FixedFormat so
// tensors of potentials stay a flat array of integers.
struct Fixed {
  std::int64_t raw = 0;

  friend auto operator<=>(const Fixed&, const Fixed&) = default;
};

// Signed fixed-point format: total_bits including sign, frac_bits of fraction.
// Every arithmetic helper checks the result against the representable range and
// throws FixedPointOverflow instead of wrapping.
struct FixedFormat {
  int total_bits = 24;
  int frac_bits = 8;

  void validate() const;

  std::int64_t max_raw() const { return (std::int64_t{1} << (total_bits - 1)) - 1; }
  std::int64_t min_raw() const { return -(std::int64_t{1} << (total_bits - 1)); }
  double resolution() const;

  // Round-to-nearest-even quantization of a real value.
  Fixed quantize(double value) const;
  Fixed from_int(std::int64_t value) const;
  double to_double(Fixed value) const;

  Fixed add(Fixed a, Fixed b) const;
  Fixed sub(Fixed a, Fixed b) const;
  Fixed checked(std::int64_t raw) const;

  // Storage width of one value in bytes (used for SRAM and DRAM accounting).
  int storage_bytes() const { return (total_bits + 7) / 8; }

  std::string describe() const;

  friend bool operator==(const FixedFormat&, const FixedFormat&) = default;
};

}  // namespace vsa
