#pragma once

#include "scenecloak/frameio.hpp"
#include "scenecloak/image.hpp"

namespace scenecloak {

struct ScenePartitionConfig {
  /// Mean absolute per-channel difference, unit-interval units. 0.04 is
  /// roughly 10/255.
  double epsilon_scene = 0.04;
  /// Reported only; short scenes are never merged.
  std::size_t min_scene_len = 1;

  void validate() const;
};

/// Mean of |a - b| over all H*W*3 values.
template <typename A, typename B> double mean_pixel_diff(const Image<A> &a, const Image<B> &b) {
  require_same_shape(a, b, "mean_pixel_diff");
  return (a.values().template cast<double>() - b.values().template cast<double>()).abs().mean();
}

/// Greedy consecutive-frame split: frame i opens a new scene exactly when
/// mean_pixel_diff(F[i], F[i-1]) >= epsilon_scene.
SceneManifest partition(const FrameSequence &seq, const ScenePartitionConfig &cfg);

/// Indices i > 0 that start a scene.
std::vector<std::size_t> scene_boundaries(const SceneManifest &m);

/// Number of scenes shorter than cfg.min_scene_len.
std::size_t short_scene_count(const SceneManifest &m, const ScenePartitionConfig &cfg);

} // namespace scenecloak
