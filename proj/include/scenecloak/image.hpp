#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "scenecloak/errors.hpp"

namespace scenecloak {

using Index = Eigen::Index;

inline constexpr Index kChannels = 3;

/*
 * Dense H x W x 3 tensor stored row-major with interleaved channels, i.e.
 * value (y, x, c) lives at ((y * W) + x) * 3 + c. The flat storage is an
 * Eigen column array so whole-image arithmetic stays an Eigen expression.
 */
template <typename Scalar> class Image {
public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Image() = default;

  Image(Index height, Index width)
      : height_(height), width_(width), values_(Array::Zero(height * width * kChannels)) {
    if (height <= 0 || width <= 0) {
      throw ShapeError("image dimensions must be positive");
    }
  }

  template <typename Derived>
  Image(Index height, Index width, const Eigen::ArrayBase<Derived> &values)
      : height_(height), width_(width), values_(values) {
    if (height <= 0 || width <= 0) {
      throw ShapeError("image dimensions must be positive");
    }
    if (values_.size() != height * width * kChannels) {
      throw ShapeError("value count does not match " + std::to_string(height) + "x" +
                       std::to_string(width) + "x3");
    }
  }

  static Image constant(Index height, Index width, Scalar v) {
    return Image(height, width, Array::Constant(height * width * kChannels, v));
  }

  Index height() const { return height_; }
  Index width() const { return width_; }
  Index size() const { return values_.size(); }
  bool empty() const { return values_.size() == 0; }

  const Array &values() const { return values_; }
  Array &values() { return values_; }

  Scalar operator()(Index y, Index x, Index c) const {
    return values_[(y * width_ + x) * kChannels + c];
  }
  Scalar &operator()(Index y, Index x, Index c) {
    return values_[(y * width_ + x) * kChannels + c];
  }

  template <typename Other> bool same_shape(const Image<Other> &other) const {
    return height_ == other.height() && width_ == other.width();
  }

  friend bool operator==(const Image &a, const Image &b) {
    return a.height_ == b.height_ && a.width_ == b.width_ &&
           (a.values_.size() == 0 || (a.values_ == b.values_).all());
  }

private:
  Index height_ = 0;
  Index width_ = 0;
  Array values_;
};

/// Pixel image, unit-interval values.
using Frame = Image<double>;

template <typename A, typename B>
void require_same_shape(const Image<A> &a, const Image<B> &b, const char *what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + std::to_string(a.height()) + "x" +
                     std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                     std::to_string(b.width()));
  }
}

/// Signed per-pixel change bounded in l-infinity by `budget`. Stored in
/// single precision so the on-disk format round-trips bit-exactly and a
/// reused perturbation is the same bits wherever it travels.
struct PerturbationTensor {
  Image<float> deltas;
  float budget = 0.0f;

  float linf() const { return deltas.empty() ? 0.0f : deltas.values().abs().maxCoeff(); }

  static PerturbationTensor zeros(Index height, Index width, float budget) {
    return {Image<float>(height, width), budget};
  }

  friend bool operator==(const PerturbationTensor &, const PerturbationTensor &) = default;
};

struct FrameSequence {
  std::vector<Frame> frames;
  double fps = 30.0;
  std::string source_id;

  std::size_t size() const { return frames.size(); }
};

/// Throws ValidationError unless the frame is at least 8x8 with every value
/// in [0, 1].
void validate_frame(const Frame &frame);

/// Non-empty, frames valid and identically shaped.
void validate_sequence(const FrameSequence &seq);

/// Budget invariant: |delta|_inf <= budget + 1e-6.
void validate_perturbation(const PerturbationTensor &t);

/// Clip every value of `frame + delta` into [0, 1].
Frame apply_perturbation(const Frame &frame, const PerturbationTensor &delta);

/// Largest centered square; odd margins leave the extra row/column at the end.
Frame center_crop_square(const Frame &frame);

} // namespace scenecloak
