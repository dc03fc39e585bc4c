#include "vsa/tensor.hpp"

#include <numeric>

#include "vsa/errors.hpp"

namespace vsa {

std::string Shape3::str() const {
  return std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width);
}

SpikeMap::SpikeMap(Shape3 shape) : shape_(shape), bits_(shape.count(), 0) {
  if (!shape.positive()) throw ShapeError("spike map dimensions must be positive, got " + shape.str());
}

void SpikeMap::set(int c, int y, int x, std::uint8_t bit) {
  if (bit > 1) throw InvalidParameter("spike value must be 0 or 1");
  bits_[shape_.index(c, y, x)] = bit;
}

std::size_t SpikeMap::popcount() const {
  return std::accumulate(bits_.begin(), bits_.end(), std::size_t{0});
}

SpikeTrain::SpikeTrain(int time_steps, Shape3 shape) : shape_(shape) {
  if (time_steps <= 0) throw InvalidParameter("time steps must be positive");
  steps_.assign(static_cast<std::size_t>(time_steps), SpikeMap(shape));
}

void SpikeTrain::set_step(int t, SpikeMap map) {
  if (!(map.shape() == shape_)) {
    throw ShapeError("spike map " + map.shape().str() + " does not match train " + shape_.str());
  }
  steps_.at(static_cast<std::size_t>(t)) = std::move(map);
}

std::size_t SpikeTrain::popcount() const {
  std::size_t total = 0;
  for (const auto& s : steps_) total += s.popcount();
  return total;
}

ByteImage::ByteImage(Shape3 shape) : shape_(shape), data_(shape.count(), 0) {
  if (!shape.positive()) throw ShapeError("image dimensions must be positive, got " + shape.str());
}

ByteImage::ByteImage(Shape3 shape, std::vector<std::uint8_t> data) : shape_(shape), data_(std::move(data)) {
  if (!shape.positive()) throw ShapeError("image dimensions must be positive, got " + shape.str());
  if (data_.size() != shape.count()) {
    throw ShapeError("image payload has " + std::to_string(data_.size()) + " bytes, expected " +
                     std::to_string(shape.count()));
  }
}

IntTensor::IntTensor(Shape3 shape) : shape_(shape), data_(shape.count(), 0) {}

BinaryWeightTensor::BinaryWeightTensor(int out_channels, int in_channels, int kernel_h, int kernel_w)
    : out_(out_channels), in_(in_channels), kh_(kernel_h), kw_(kernel_w) {
  if (out_ <= 0 || in_ <= 0 || kh_ <= 0 || kw_ <= 0) {
    throw ShapeError("weight tensor dimensions must be positive");
  }
  signs_.assign(static_cast<std::size_t>(out_) * in_ * kh_ * kw_, 0);
}

void BinaryWeightTensor::set_sign(int o, int i, int y, int x, std::uint8_t bit) {
  if (bit > 1) throw InvalidParameter("sign bit must be 0 or 1");
  signs_[index(o, i, y, x)] = bit;
}

std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> packed((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  return packed;
}

std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> packed, std::size_t count) {
  if (packed.size() * 8 < count) throw ShapeError("packed buffer too short");
  std::vector<std::uint8_t> bits(count);
  for (std::size_t i = 0; i < count; ++i) bits[i] = (packed[i / 8] >> (i % 8)) & 1u;
  return bits;
}

}  // namespace vsa
