#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scenecloak/image.hpp"

namespace scenecloak {

enum class SynthKind { Static, Pan, JumpCut, NoiseMotion };

SynthKind parse_synth_kind(const std::string &name);
std::string to_string(SynthKind k);

struct SynthParams {
  SynthKind kind = SynthKind::Static;
  Index width = 64;
  Index height = 64;
  /// Total frames.
  std::size_t length = 50;
  /// JumpCut: number of static scenes.
  std::size_t scenes = 3;
  /// Pan: bound on mean_pixel_diff between consecutive frames.
  double step_diff = 0.01;
  /// NoiseMotion: block edge and per-frame displacement in pixels.
  Index block = 12;
  Index speed = 2;
  std::uint64_t seed = 42;

  void validate() const;
};

struct SynthCorpus {
  FrameSequence sequence;
  /// Frame indices that start a new scene (JumpCut only).
  std::vector<std::size_t> cuts;
};

/// Smooth random texture: per channel, a sum of seeded sinusoids kept
/// inside [0.15, 0.85]. `shift` translates it horizontally in pixels.
Frame texture(Index height, Index width, std::uint64_t seed, double shift = 0.0);

SynthCorpus synth_corpus(const SynthParams &p);

} // namespace scenecloak
