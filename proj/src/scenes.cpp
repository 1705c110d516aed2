#include "scenecloak/scenes.hpp"

namespace scenecloak {

void ScenePartitionConfig::validate() const {
  if (!(epsilon_scene > 0.0)) {
    throw ValidationError("epsilon_scene must be positive");
  }
  if (min_scene_len < 1) {
    throw ValidationError("min_scene_len must be at least 1");
  }
}

SceneManifest partition(const FrameSequence &seq, const ScenePartitionConfig &cfg) {
  cfg.validate();
  if (seq.frames.empty()) {
    throw ValidationError("cannot partition an empty sequence");
  }
  const std::size_t n = seq.frames.size();
  std::vector<double> diffs(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    diffs[i] = mean_pixel_diff(seq.frames[i], seq.frames[i - 1]);
  }

  SceneManifest m;
  m.total_frames = n;
  std::size_t start = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (diffs[i] >= cfg.epsilon_scene) {
      m.scenes.push_back({start, i, "", cfg.epsilon_scene});
      start = i;
    }
  }
  m.scenes.push_back({start, n, "", cfg.epsilon_scene});
  return m;
}

std::vector<std::size_t> scene_boundaries(const SceneManifest &m) {
  std::vector<std::size_t> out;
  for (const auto &s : m.scenes) {
    if (s.start > 0) {
      out.push_back(s.start);
    }
  }
  return out;
}

std::size_t short_scene_count(const SceneManifest &m, const ScenePartitionConfig &cfg) {
  std::size_t count = 0;
  for (const auto &s : m.scenes) {
    count += s.length() < cfg.min_scene_len ? 1 : 0;
  }
  return count;
}

} // namespace scenecloak
