#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scenecloak/image.hpp"

namespace scenecloak {

namespace fs = std::filesystem;

struct SceneRange {
  std::size_t start = 0; // inclusive
  std::size_t end = 0;   // exclusive
  std::string target_file;
  double epsilon_scene = 0.0;

  std::size_t length() const { return end - start; }
};

struct SceneManifest {
  std::vector<SceneRange> scenes;
  std::size_t total_frames = 0;
};

/// Scenes must be ordered, disjoint, non-empty and cover [0, total_frames).
void validate_manifest(const SceneManifest &m);

/// Single-scene manifest spanning the whole sequence.
SceneManifest whole_sequence_manifest(std::size_t total_frames, double epsilon_scene = 0.0);

// Frames: 8-bit RGB PNG, v / 255 on load, round-half-up on store.
Frame read_png(const fs::path &path);
void write_png(const Frame &frame, const fs::path &path);

/// Name of frame `index` inside a sequence directory (`frame_%06d.png`).
std::string frame_filename(std::size_t index);

FrameSequence load_sequence(const fs::path &dir);
void save_sequence(const FrameSequence &seq, const fs::path &dir);

// FVDT binary tensor:
//   "FVDT" | u16 version | u32 H | u32 W | f32 budget | H*W*3 f32
// all little-endian.
inline constexpr std::uint16_t kDeltaVersion = 1;

std::vector<std::uint8_t> encode_delta(const PerturbationTensor &t);
PerturbationTensor decode_delta(const std::vector<std::uint8_t> &bytes);
void write_delta(const PerturbationTensor &t, const fs::path &path);
PerturbationTensor read_delta(const fs::path &path);

std::string manifest_to_json(const SceneManifest &m);
SceneManifest manifest_from_json(const std::string &text);
void write_manifest(const SceneManifest &m, const fs::path &path);
SceneManifest read_manifest(const fs::path &path);

std::string read_text_file(const fs::path &path);
void write_text_file(const fs::path &path, const std::string &text);

} // namespace scenecloak
