#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vsa/fixed_point.hpp"
#include "vsa/tensor.hpp"

namespace vsa {

// Batch-normalization statistics of one output channel.
struct BNParams {
  double gamma = 1.0;
  double beta = 0.0;
  double mean = 0.0;
  double variance = 1.0;
  double epsilon = 1e-5;
};

// Bias and threshold after folding BN into the integrate-and-fire comparison.
// With compare_flipped the neuron fires when the potential falls to or below
// the threshold (negative gamma reverses the inequality).
struct FoldedNeuronParams {
  Fixed bias;
  Fixed threshold;
  bool compare_flipped = false;

  friend bool operator==(const FoldedNeuronParams&, const FoldedNeuronParams&) = default;
};

struct IfResult {
  Fixed potential;
  std::uint8_t spike = 0;
};

bool fires(Fixed potential, Fixed threshold, bool compare_flipped);

// One integrate-and-fire update: V = V_prev * (1 - o_prev) + input, then fire
// against the threshold. Overflow of V throws FixedPointOverflow.
IfResult if_step(Fixed v_prev, std::uint8_t o_prev, Fixed weighted_input, Fixed threshold,
                 bool compare_flipped, const FixedFormat& format);

// Folds BN into bias = mean - (s/gamma)*beta and threshold = (s/gamma)*v_th with
// s = sqrt(variance + epsilon). input_scale multiplies both before quantization
// (256 for the encoding layer, whose integer inputs are u/256).
FoldedNeuronParams fold_bn(const BNParams& bn, double v_th, const FixedFormat& format,
                           double input_scale = 1.0);

// Unfolded reference: normalizes each step's conv output with BN, integrates
// with hard reset, and fires against the original v_th. Real arithmetic.
std::vector<std::uint8_t> spikes_unfolded_oracle(std::span<const double> conv_outputs, const BNParams& bn,
                                            double v_th);

// Folded path: subtract the folded bias from each (quantized) input and run
// if_step against the folded threshold.
std::vector<std::uint8_t> spikes_folded(std::span<const double> conv_outputs,
                                        const FoldedNeuronParams& params, const FixedFormat& format);

// Membrane potentials of one layer plus the spikes fired at the last update,
// which drive the reset term of the next update.
class MembraneState {
 public:
  MembraneState() = default;
  MembraneState(Shape3 shape, FixedFormat format);

  const Shape3& shape() const { return shape_; }
  const FixedFormat& format() const { return format_; }
  Fixed potential(int c, int y, int x) const { return Fixed{potential_[shape_.index(c, y, x)]}; }
  std::uint8_t last_spike(int c, int y, int x) const { return last_spike_[shape_.index(c, y, x)]; }

  // Applies if_step at one position and records the result.
  std::uint8_t update(int c, int y, int x, Fixed weighted_input, const FoldedNeuronParams& params);

 private:
  Shape3 shape_;
  FixedFormat format_;
  std::vector<std::int64_t> potential_;
  std::vector<std::uint8_t> last_spike_;
};

}  // namespace vsa
