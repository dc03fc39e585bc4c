#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vsa/fixed_point.hpp"
#include "vsa/network.hpp"
#include "vsa/neuron.hpp"
#include "vsa/tensor.hpp"

namespace vsa {

// Weights and folded neuron parameters of one network layer. Both are empty
// for pooling layers.
struct LayerParams {
  BinaryWeightTensor weights;
  std::vector<FoldedNeuronParams> neurons;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct ModelBundle {
  NetworkDescription network;
  Shape3 input;
  FixedFormat format;
  std::vector<LayerParams> layers;  // one entry per network layer

  ValidatedNetwork validated() const { return validate(network, input); }

  // CRC-32 of the serialized payload; identical bundles share it.
  std::uint32_t checksum() const;

  // Throws ShapeError if any tensor disagrees with the layer description.
  void check_consistency() const;

  friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

// "VSA1" container, little-endian:
//   magic[4] version:u32 payload_length:u64 payload[payload_length] crc32:u32
std::vector<std::uint8_t> serialize_bundle(const ModelBundle& bundle);
ModelBundle deserialize_bundle(const std::vector<std::uint8_t>& bytes);

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

struct RandomBundleOptions {
  FixedFormat format;
  double bn_epsilon = 1e-5;
  // Scale of the encoding layer's integer inputs relative to the (0, 1) range.
  double encoding_input_scale = 256.0;
};

// Deterministic random signs and BN statistics (gamma in [0.5, 2], beta and
// mean in [-1, 1], variance in [0.25, 4]) folded with each layer's v_th.
ModelBundle generate_random_bundle(const NetworkDescription& net, Shape3 input, std::uint64_t seed,
                                   const RandomBundleOptions& options = {});

ByteImage generate_random_image(Shape3 shape, std::uint64_t seed);

// Raw input tensor: C, H, W as u32 little-endian, then row-major bytes.
void save_input(const ByteImage& image, const std::filesystem::path& path);
ByteImage load_input(const std::filesystem::path& path);

}  // namespace vsa
