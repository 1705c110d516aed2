#pragma once

#include <optional>
#include <span>
#include <string>

#include "scenecloak/encoder.hpp"
#include "scenecloak/image.hpp"

namespace scenecloak {

enum class BaseMethod { SceneAverage, MiddleFrame, EmbeddingMedoid };

/// "average" | "middle" | "medoid"
BaseMethod parse_base_method(const std::string &name);
std::string to_string(BaseMethod m);

struct TargetSpec {
  BaseMethod base_method = BaseMethod::SceneAverage;
  std::optional<Frame> style_image;
  double blend_lambda = 0.5;

  void validate() const;
};

/// Base image for a scene.
///
/// SceneAverage is the per-pixel mean, MiddleFrame the frame at floor(M/2),
/// EmbeddingMedoid the scene frame whose embedding lies nearest the centroid
/// of all scene embeddings (lowest index on ties). The medoid needs an
/// extractor; the other two ignore it.
Frame base_image(std::span<const Frame> scene_frames, BaseMethod method,
                 const FeatureExtractor *extractor = nullptr);

/// T = (1 - lambda) * base + lambda * style, clipped to [0, 1]. Without a
/// style image T is the base.
Frame blend_target(const Frame &base, const TargetSpec &spec);

Frame make_target(std::span<const Frame> scene_frames, const TargetSpec &spec,
                  const FeatureExtractor *extractor = nullptr);

/// Black and white checkerboard, the fixed-pattern style preset.
Frame checkerboard(Index height, Index width, Index cell = 8);

} // namespace scenecloak
