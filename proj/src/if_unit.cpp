#include "vsa/if_unit.hpp"

#include "vsa/errors.hpp"

namespace vsa::arch {

SpikeMap if_unit_process(const IntTensor& conv_out, std::span<const FoldedNeuronParams> params,
                         MembraneState& membrane) {
  const Shape3 s = conv_out.shape();
  if (!(s == membrane.shape())) {
    throw ShapeError("conv output " + s.str() + " does not match membrane " + membrane.shape().str());
  }
  if (params.size() != static_cast<std::size_t>(s.channels)) {
    throw ShapeError("expected " + std::to_string(s.channels) + " neuron parameter sets, got " +
                     std::to_string(params.size()));
  }
  const FixedFormat& fmt = membrane.format();
  SpikeMap spikes(s);
  for (int c = 0; c < s.channels; ++c) {
    const FoldedNeuronParams& n = params[static_cast<std::size_t>(c)];
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) {
        const Fixed drive = fmt.sub(fmt.from_int(conv_out.at(c, y, x)), n.bias);
        spikes.set(c, y, x, membrane.update(c, y, x, drive, n));
      }
  }
  return spikes;
}

IfUnit::IfUnit(Shape3 shape, FixedFormat format, IfMode mode) : mode_(mode), membrane_(shape, format) {}

void IfUnit::hold(IntTensor conv_out) {
  if (mode_ != IfMode::kEncodingIterate) throw ScheduleError("only the encoding layer holds its conv output");
  if (!(conv_out.shape() == membrane_.shape())) throw ShapeError("held conv output has the wrong shape");
  held_ = std::move(conv_out);
}

SpikeMap IfUnit::step(std::span<const FoldedNeuronParams> params, const IntTensor* conv_out) {
  if (mode_ == IfMode::kEncodingIterate) {
    if (conv_out) throw ScheduleError("encoding-iterate mode re-uses the held conv output");
    if (!held_) throw ScheduleError("encoding-iterate step before the conv output was held");
    return if_unit_process(*held_, params, membrane_);
  }
  if (!conv_out) throw ScheduleError("spiking mode needs a conv output every step");
  return if_unit_process(*conv_out, params, membrane_);
}

}  // namespace vsa::arch
