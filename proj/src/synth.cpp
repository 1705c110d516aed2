#include "scenecloak/synth.hpp"

#include <cmath>
#include <numbers>

#include "scenecloak/rng.hpp"
#include "scenecloak/scenes.hpp"

namespace scenecloak {

SynthKind parse_synth_kind(const std::string &name) {
  if (name == "static") {
    return SynthKind::Static;
  }
  if (name == "pan") {
    return SynthKind::Pan;
  }
  if (name == "jumpcut") {
    return SynthKind::JumpCut;
  }
  if (name == "noise-motion") {
    return SynthKind::NoiseMotion;
  }
  throw ValidationError("unknown corpus kind '" + name + "' (static|pan|jumpcut|noise-motion)");
}

std::string to_string(SynthKind k) {
  switch (k) {
  case SynthKind::Static:
    return "static";
  case SynthKind::Pan:
    return "pan";
  case SynthKind::JumpCut:
    return "jumpcut";
  case SynthKind::NoiseMotion:
    return "noise-motion";
  }
  return "?";
}

void SynthParams::validate() const {
  if (width < 8 || height < 8) {
    throw ValidationError("synthetic frames must be at least 8x8");
  }
  if (length < 1) {
    throw ValidationError("synthetic sequence needs at least one frame");
  }
  if (kind == SynthKind::JumpCut && (scenes < 1 || scenes > length)) {
    throw ValidationError("jumpcut needs 1 <= scenes <= length");
  }
  if (kind == SynthKind::Pan && !(step_diff > 0.0)) {
    throw ValidationError("pan step_diff must be positive");
  }
  if (kind == SynthKind::NoiseMotion && (block < 1 || block >= std::min(width, height) || speed < 0)) {
    throw ValidationError("noise-motion block must fit inside the frame");
  }
}

Frame texture(Index height, Index width, std::uint64_t seed, double shift) {
  constexpr int kWaves = 4;
  SplitMix64 rng(seed);
  struct Wave {
    double fx, fy, phase, amp;
  };
  Wave waves[kChannels][kWaves];
  double base[kChannels];
  for (Index c = 0; c < kChannels; ++c) {
    base[c] = 0.35 + 0.3 * rng.uniform();
    for (auto &w : waves[c]) {
      // periods between 8 and 40 px
      w.fx = 2.0 * std::numbers::pi / (8.0 + 32.0 * rng.uniform()) * (rng.uniform() < 0.5 ? -1 : 1);
      w.fy = 2.0 * std::numbers::pi / (8.0 + 32.0 * rng.uniform()) * (rng.uniform() < 0.5 ? -1 : 1);
      w.phase = 2.0 * std::numbers::pi * rng.uniform();
      w.amp = 0.05 + 0.05 * rng.uniform();
    }
  }
  Frame out(height, width);
  for (Index y = 0; y < height; ++y) {
    for (Index x = 0; x < width; ++x) {
      const double xs = static_cast<double>(x) + shift;
      for (Index c = 0; c < kChannels; ++c) {
        double v = base[c];
        for (const auto &w : waves[c]) {
          v += w.amp * std::sin(w.fx * xs + w.fy * static_cast<double>(y) + w.phase);
        }
        out(y, x, c) = std::clamp(v, 0.15, 0.85);
      }
    }
  }
  return out;
}

namespace {

constexpr double kJumpCutMinDiff = 0.1;

// Largest per-frame shift whose consecutive diffs all stay under the bound.
double pan_speed(const SynthParams &p) {
  const Frame a = texture(p.height, p.width, p.seed, 0.0);
  const Frame b = texture(p.height, p.width, p.seed, 1.0);
  const double per_pixel = std::max(mean_pixel_diff(a, b), 1e-9);
  return 0.9 * p.step_diff / per_pixel;
}

} // namespace

SynthCorpus synth_corpus(const SynthParams &p) {
  p.validate();
  SynthCorpus out;
  out.sequence.source_id = "synth-" + to_string(p.kind);
  auto &frames = out.sequence.frames;
  switch (p.kind) {
  case SynthKind::Static: {
    const Frame f = texture(p.height, p.width, p.seed);
    frames.assign(p.length, f);
    break;
  }
  case SynthKind::Pan: {
    double speed = pan_speed(p);
    for (;;) {
      frames.clear();
      bool ok = true;
      for (std::size_t t = 0; t < p.length; ++t) {
        frames.push_back(texture(p.height, p.width, p.seed, speed * static_cast<double>(t)));
        if (t > 0 && mean_pixel_diff(frames[t], frames[t - 1]) > p.step_diff) {
          ok = false;
          break;
        }
      }
      if (ok) {
        break;
      }
      speed *= 0.8;
    }
    break;
  }
  case SynthKind::JumpCut: {
    std::uint64_t salt = 0;
    for (std::size_t s = 0; s < p.scenes; ++s) {
      const std::size_t begin = s * p.length / p.scenes;
      const std::size_t end = (s + 1) * p.length / p.scenes;
      Frame f = texture(p.height, p.width, p.seed + 7919 * ++salt);
      // cuts must stand well clear of any sensible epsilon_scene
      while (!frames.empty() && mean_pixel_diff(f, frames.back()) < kJumpCutMinDiff) {
        f = texture(p.height, p.width, p.seed + 7919 * ++salt);
      }
      if (s > 0) {
        out.cuts.push_back(begin);
      }
      for (std::size_t t = begin; t < end; ++t) {
        frames.push_back(f);
      }
    }
    break;
  }
  case SynthKind::NoiseMotion: {
    const Frame bg = texture(p.height, p.width, p.seed);
    SplitMix64 rng(p.seed ^ 0xb10cULL);
    const double colour[3] = {0.1 + 0.1 * rng.uniform(), 0.8 + 0.1 * rng.uniform(),
                              0.1 + 0.1 * rng.uniform()};
    const Index travel = p.width - p.block;
    const Index y0 = (p.height - p.block) / 2;
    for (std::size_t t = 0; t < p.length; ++t) {
      Frame f = bg;
      // bounce between the left and right edges
      const Index pos = travel == 0 ? 0 : static_cast<Index>(t) * p.speed % (2 * travel);
      const Index x0 = pos <= travel ? pos : 2 * travel - pos;
      for (Index y = y0; y < y0 + p.block; ++y) {
        for (Index x = x0; x < x0 + p.block; ++x) {
          for (Index c = 0; c < kChannels; ++c) {
            f(y, x, c) = colour[c];
          }
        }
      }
      frames.push_back(std::move(f));
    }
    break;
  }
  }
  return out;
}

} // namespace scenecloak
