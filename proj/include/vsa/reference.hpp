#pragma once

#include <vector>

#include "vsa/bundle.hpp"
#include "vsa/tensor.hpp"

namespace vsa {

// Plain dense stride-1 convolutions with {-1,+1} weights over zero-padded
// inputs. Exact integer arithmetic; the reference every engine path is
// checked against.
IntTensor conv2d_oracle(const SpikeMap& input, const BinaryWeightTensor& weights, int padding);
IntTensor conv2d_oracle(const ByteImage& input, const BinaryWeightTensor& weights, int padding);

// 2x2 OR pooling of a binary map.
SpikeMap maxpool2_oracle(const SpikeMap& spikes);

struct NetworkRun {
  std::vector<SpikeTrain> layer_outputs;  // one per network layer
  std::vector<int> class_counts;          // spikes per output neuron over all steps
};

// Layer-by-layer reference execution: every layer runs all time steps before
// the next starts. The encoding conv is evaluated once on the static image and
// re-integrated at every step.
NetworkRun run_network_oracle(const ModelBundle& bundle, const ByteImage& input, int time_steps);

}  // namespace vsa
