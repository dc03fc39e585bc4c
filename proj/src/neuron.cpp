#include "vsa/neuron.hpp"

#include <cmath>

#include "vsa/errors.hpp"

namespace vsa {

bool fires(Fixed potential, Fixed threshold, bool compare_flipped) {
  return compare_flipped ? potential <= threshold : potential >= threshold;
}

IfResult if_step(Fixed v_prev, std::uint8_t o_prev, Fixed weighted_input, Fixed threshold,
                 bool compare_flipped, const FixedFormat& format) {
  const Fixed carried = o_prev ? Fixed{0} : v_prev;
  const Fixed v = format.add(carried, weighted_input);
  return {v, static_cast<std::uint8_t>(fires(v, threshold, compare_flipped))};
}

FoldedNeuronParams fold_bn(const BNParams& bn, double v_th, const FixedFormat& format, double input_scale) {
  if (bn.gamma == 0.0 || !std::isfinite(bn.gamma)) throw InvalidParameter("BN gamma must be non-zero");
  if (bn.variance < 0.0) throw InvalidParameter("BN variance must be non-negative");
  if (bn.epsilon < 0.0) throw InvalidParameter("BN epsilon must be non-negative");
  const double ratio = std::sqrt(bn.variance + bn.epsilon) / bn.gamma;
  FoldedNeuronParams folded;
  folded.bias = format.quantize((bn.mean - ratio * bn.beta) * input_scale);
  folded.threshold = format.quantize(ratio * v_th * input_scale);
  folded.compare_flipped = bn.gamma < 0.0;
  return folded;
}

std::vector<std::uint8_t> spikes_unfolded_oracle(std::span<const double> conv_outputs, const BNParams& bn,
                                            double v_th) {
  const double sd = std::sqrt(bn.variance + bn.epsilon);
  std::vector<std::uint8_t> spikes;
  spikes.reserve(conv_outputs.size());
  double v = 0.0;
  std::uint8_t o = 0;
  for (double x : conv_outputs) {
    v = v * (1 - o) + (bn.gamma * (x - bn.mean) / sd + bn.beta);
    o = v >= v_th ? 1 : 0;
    spikes.push_back(o);
  }
  return spikes;
}

std::vector<std::uint8_t> spikes_folded(std::span<const double> conv_outputs,
                                        const FoldedNeuronParams& params, const FixedFormat& format) {
  std::vector<std::uint8_t> spikes;
  spikes.reserve(conv_outputs.size());
  Fixed v{0};
  std::uint8_t o = 0;
  for (double x : conv_outputs) {
    const Fixed drive = format.sub(format.quantize(x), params.bias);
    const IfResult r = if_step(v, o, drive, params.threshold, params.compare_flipped, format);
    v = r.potential;
    o = r.spike;
    spikes.push_back(o);
  }
  return spikes;
}

MembraneState::MembraneState(Shape3 shape, FixedFormat format)
    : shape_(shape), format_(format), potential_(shape.count(), 0), last_spike_(shape.count(), 0) {}

std::uint8_t MembraneState::update(int c, int y, int x, Fixed weighted_input, const FoldedNeuronParams& params) {
  const std::size_t i = shape_.index(c, y, x);
  const IfResult r = if_step(Fixed{potential_[i]}, last_spike_[i], weighted_input, params.threshold,
                             params.compare_flipped, format_);
  potential_[i] = r.potential.raw;
  last_spike_[i] = r.spike;
  return r.spike;
}

}  // namespace vsa
