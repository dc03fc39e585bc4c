#include "vsa/fixed_point.hpp"

#include <cmath>

#include "vsa/errors.hpp"

namespace vsa {

void FixedFormat::validate() const {
  if (total_bits < 2 || total_bits > 48) {
    throw ConfigError("fixed-point total bits must be in [2, 48], got " + std::to_string(total_bits));
  }
  if (frac_bits < 0 || frac_bits >= total_bits) {
    throw ConfigError("fixed-point fractional bits must be in [0, total_bits), got " +
                      std::to_string(frac_bits));
  }
}

double FixedFormat::resolution() const { return std::ldexp(1.0, -frac_bits); }

Fixed FixedFormat::quantize(double value) const {
  if (!std::isfinite(value)) {
    throw FixedPointOverflow("cannot quantize non-finite value to " + describe());
  }
  // std::nearbyint honours the default FE_TONEAREST mode: ties go to even.
  const double scaled = std::nearbyint(std::ldexp(value, frac_bits));
  if (scaled > static_cast<double>(max_raw()) || scaled < static_cast<double>(min_raw())) {
    throw FixedPointOverflow("value " + std::to_string(value) + " does not fit " + describe());
  }
  return Fixed{static_cast<std::int64_t>(scaled)};
}

Fixed FixedFormat::from_int(std::int64_t value) const {
  const std::int64_t limit = std::int64_t{1} << (total_bits - 1 - frac_bits);
  if (value >= limit || value < -limit) {
    throw FixedPointOverflow("integer " + std::to_string(value) + " does not fit " + describe());
  }
  return Fixed{value * (std::int64_t{1} << frac_bits)};
}

double FixedFormat::to_double(Fixed value) const {
  return std::ldexp(static_cast<double>(value.raw), -frac_bits);
}

Fixed FixedFormat::checked(std::int64_t raw) const {
  if (raw > max_raw() || raw < min_raw()) {
    throw FixedPointOverflow("raw value " + std::to_string(raw) + " overflows " + describe());
  }
  return Fixed{raw};
}

Fixed FixedFormat::add(Fixed a, Fixed b) const { return checked(a.raw + b.raw); }

Fixed FixedFormat::sub(Fixed a, Fixed b) const { return checked(a.raw - b.raw); }

std::string FixedFormat::describe() const {
  return "Q" + std::to_string(total_bits - frac_bits) + "." + std::to_string(frac_bits) + " (" +
         std::to_string(total_bits) + "-bit)";
}

}  // namespace vsa
