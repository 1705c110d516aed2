#include "scenecloak/image.hpp"

#include <algorithm>
#include <cmath>

namespace scenecloak {

void validate_frame(const Frame &frame) {
  if (frame.height() < 8 || frame.width() < 8) {
    throw ValidationError("frame must be at least 8x8, got " + std::to_string(frame.height()) +
                          "x" + std::to_string(frame.width()));
  }
  const auto &v = frame.values();
  if (!v.allFinite() || v.minCoeff() < 0.0 || v.maxCoeff() > 1.0) {
    throw ValidationError("frame values must lie in [0, 1]");
  }
}

void validate_sequence(const FrameSequence &seq) {
  if (seq.frames.empty()) {
    throw ValidationError("frame sequence is empty");
  }
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    validate_frame(seq.frames[i]);
    if (!seq.frames[i].same_shape(seq.frames.front())) {
      throw ShapeError("frame " + std::to_string(i) + " differs in size from frame 0");
    }
  }
}

void validate_perturbation(const PerturbationTensor &t) {
  if (!(t.budget > 0.0f) || !std::isfinite(t.budget)) {
    throw ValidationError("perturbation budget must be positive");
  }
  if (!t.deltas.values().allFinite()) {
    throw ValidationError("perturbation contains non-finite values");
  }
  const double m = t.linf();
  if (m > static_cast<double>(t.budget) + 1e-6) {
    throw ValidationError("perturbation l-inf " + std::to_string(m) + " exceeds budget " +
                          std::to_string(t.budget));
  }
}

Frame apply_perturbation(const Frame &frame, const PerturbationTensor &delta) {
  require_same_shape(frame, delta.deltas, "apply_perturbation");
  return Frame(frame.height(), frame.width(),
               (frame.values() + delta.deltas.values().cast<double>()).min(1.0).max(0.0));
}

Frame center_crop_square(const Frame &frame) {
  const Index side = std::min(frame.height(), frame.width());
  const Index oy = (frame.height() - side) / 2;
  const Index ox = (frame.width() - side) / 2;
  Frame out(side, side);
  for (Index y = 0; y < side; ++y) {
    out.values().segment(y * side * kChannels, side * kChannels) =
        frame.values().segment(((oy + y) * frame.width() + ox) * kChannels, side * kChannels);
  }
  return out;
}

} // namespace scenecloak
