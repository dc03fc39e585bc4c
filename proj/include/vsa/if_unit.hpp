#pragma once

#include <optional>
#include <span>

#include "vsa/neuron.hpp"
#include "vsa/tensor.hpp"

namespace vsa::arch {

enum class IfMode { kSpiking, kEncodingIterate };

// Subtracts each channel's folded bias from the conv output and runs if_step
// at every position. Overflow propagates as FixedPointOverflow.
SpikeMap if_unit_process(const IntTensor& conv_out, std::span<const FoldedNeuronParams> params,
                         MembraneState& membrane);

// IF neuron unit with two membrane SRAMs. The first holds the potentials;
// in encoding-iterate mode the second keeps the layer's conv output, which is
// re-integrated against the residue potential at every time step.
class IfUnit {
 public:
  IfUnit(Shape3 shape, FixedFormat format, IfMode mode);

  IfMode mode() const { return mode_; }
  const MembraneState& membrane() const { return membrane_; }
  bool holding() const { return held_.has_value(); }

  // Encoding mode only: store the conv output in the second membrane SRAM.
  void hold(IntTensor conv_out);

  // Spiking mode: integrate this step's conv output. Encoding mode: pass
  // nullptr to re-integrate the held output.
  SpikeMap step(std::span<const FoldedNeuronParams> params, const IntTensor* conv_out = nullptr);

 private:
  IfMode mode_;
  MembraneState membrane_;
  std::optional<IntTensor> held_;
};

}  // namespace vsa::arch
