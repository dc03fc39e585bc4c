#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vsa {

struct Shape3 {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height + y) * width + x;
  }
  bool positive() const { return channels > 0 && height > 0 && width > 0; }
  std::string str() const;

  friend bool operator==(const Shape3&, const Shape3&) = default;
};

// Binary activation map of a single time step, [C][H][W], one byte per bit.
class SpikeMap {
 public:
  SpikeMap() = default;
  explicit SpikeMap(Shape3 shape);

  const Shape3& shape() const { return shape_; }
  std::uint8_t at(int c, int y, int x) const { return bits_[shape_.index(c, y, x)]; }
  void set(int c, int y, int x, std::uint8_t bit);
  std::span<const std::uint8_t> bits() const { return bits_; }
  std::size_t popcount() const;

  friend bool operator==(const SpikeMap&, const SpikeMap&) = default;

 private:
  Shape3 shape_;
  std::vector<std::uint8_t> bits_;
};

// Spikes of a layer over all time steps, indexed [t][C][H][W].
class SpikeTrain {
 public:
  SpikeTrain() = default;
  SpikeTrain(int time_steps, Shape3 shape);

  int time_steps() const { return static_cast<int>(steps_.size()); }
  const Shape3& shape() const { return shape_; }
  const SpikeMap& step(int t) const { return steps_.at(static_cast<std::size_t>(t)); }
  void set_step(int t, SpikeMap map);
  std::uint8_t at(int t, int c, int y, int x) const { return step(t).at(c, y, x); }
  std::size_t popcount() const;

  friend bool operator==(const SpikeTrain&, const SpikeTrain&) = default;

 private:
  Shape3 shape_;
  std::vector<SpikeMap> steps_;
};

// Unsigned 8-bit multi-channel input, [C][H][W].
class ByteImage {
 public:
  ByteImage() = default;
  explicit ByteImage(Shape3 shape);
  ByteImage(Shape3 shape, std::vector<std::uint8_t> data);

  const Shape3& shape() const { return shape_; }
  std::uint8_t at(int c, int y, int x) const { return data_[shape_.index(c, y, x)]; }
  void set(int c, int y, int x, std::uint8_t v) { data_[shape_.index(c, y, x)] = v; }
  std::span<const std::uint8_t> data() const { return data_; }

  friend bool operator==(const ByteImage&, const ByteImage&) = default;

 private:
  Shape3 shape_;
  std::vector<std::uint8_t> data_;
};

// Exact integer convolution outputs, [C][H][W].
class IntTensor {
 public:
  IntTensor() = default;
  explicit IntTensor(Shape3 shape);

  const Shape3& shape() const { return shape_; }
  std::int32_t at(int c, int y, int x) const { return data_[shape_.index(c, y, x)]; }
  std::int32_t& at(int c, int y, int x) { return data_[shape_.index(c, y, x)]; }
  std::span<const std::int32_t> data() const { return data_; }

  friend bool operator==(const IntTensor&, const IntTensor&) = default;

 private:
  Shape3 shape_;
  std::vector<std::int32_t> data_;
};

// Binary weights stored as sign bits: bit 1 is weight -1, bit 0 is weight +1.
class BinaryWeightTensor {
 public:
  BinaryWeightTensor() = default;
  BinaryWeightTensor(int out_channels, int in_channels, int kernel_h, int kernel_w);

  int out_channels() const { return out_; }
  int in_channels() const { return in_; }
  int kernel_h() const { return kh_; }
  int kernel_w() const { return kw_; }
  std::size_t count() const { return signs_.size(); }

  std::uint8_t sign(int o, int i, int y, int x) const { return signs_[index(o, i, y, x)]; }
  void set_sign(int o, int i, int y, int x, std::uint8_t bit);
  int weight(int o, int i, int y, int x) const { return 1 - 2 * sign(o, i, y, x); }
  std::span<const std::uint8_t> sign_bits() const { return signs_; }

  friend bool operator==(const BinaryWeightTensor&, const BinaryWeightTensor&) = default;

 private:
  std::size_t index(int o, int i, int y, int x) const {
    return ((static_cast<std::size_t>(o) * in_ + i) * kh_ + y) * kw_ + x;
  }

  int out_ = 0;
  int in_ = 0;
  int kh_ = 0;
  int kw_ = 0;
  std::vector<std::uint8_t> signs_;
};

// LSB-first bit packing, the layout used for bundles and spike traffic.
std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> packed, std::size_t count);

}  // namespace vsa
