#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scenecloak/encoder.hpp"
#include "scenecloak/frameio.hpp"
#include "scenecloak/image.hpp"
#include "scenecloak/target.hpp"

namespace scenecloak {

struct PGDConfig {
  /// l-inf budget in unit-pixel units.
  float budget = 0.07f;
  int steps_full = 100;
  int steps_continue = 25;
  /// Sign-gradient step; <= 0 means budget / 10.
  double step_size = 0.0;
  /// Consecutive non-improving steps before the step is halved and the
  /// iterate returns to the best point so far. 0 disables halving.
  int patience = 3;
  std::uint64_t rng_seed = 42;
  /// Amplitude of the per-frame target noise used by naive protection.
  double naive_noise = 0.15;
  /// Naive target noise is constant over cells of this many pixels.
  Index naive_noise_cell = 8;

  double effective_step() const { return step_size > 0.0 ? step_size : budget / 10.0; }
  void validate() const;
};

enum class RoutingMode { Relative, Absolute };
RoutingMode parse_routing_mode(const std::string &name);
std::string to_string(RoutingMode m);

struct RoutingConfig {
  double tau1 = 0.06;
  double tau2 = 0.45;
  RoutingMode mode = RoutingMode::Relative;

  void validate() const;
};

enum class Decision { Full, Continue, Reuse };
std::string to_string(Decision d);

struct TraceRecord {
  std::size_t frame_index = 0;
  Decision decision = Decision::Full;
  double d = 0.0;
  double final_distance = 0.0;
  double wall_time_seconds = 0.0;
  /// Encoder passes spent on this frame: forward = 1, forward+backward = 2.
  std::int64_t work_units = 0;
};

struct DecisionCounts {
  std::size_t full = 0;
  std::size_t cont = 0;
  std::size_t reuse = 0;
};

struct ProtectionTrace {
  std::vector<TraceRecord> records;
  RoutingConfig routing;
  PGDConfig pgd;
  std::string mode = "framework";

  DecisionCounts counts() const;
  double total_wall_time() const;
  std::int64_t total_work() const;
  /// Cost of protecting one frame independently: target encode plus a full
  /// optimization.
  std::int64_t naive_work_per_frame() const { return 2 * std::int64_t{pgd.steps_full} + 2; }
  void append(const ProtectionTrace &other);
};

std::string trace_to_json(const ProtectionTrace &t);
ProtectionTrace trace_from_json(const std::string &text);

struct PgdResult {
  PerturbationTensor delta;
  double initial_distance = 0.0;
  double final_distance = 0.0;
  std::int64_t work_units = 0;
};

/*
 * l-inf projected sign-gradient descent on ||phi(clip(f + delta)) - target||.
 *
 * Each step moves delta by -step * sign(grad), clips it to [-p, p] and to
 * the range keeping f + delta inside [0, 1], and rounds to single precision.
 * The best iterate seen is returned, so the final distance never exceeds the
 * distance at `init`. After `patience` steps without improvement the step
 * is halved and the iterate restarts from the best point.
 */
PgdResult pgd_optimize(const Frame &frame, const Embedding &target, const FeatureExtractor &e,
                       const PGDConfig &cfg, const std::optional<PerturbationTensor> &init,
                       int steps);

PgdResult pgd_optimize(const Frame &frame, const Frame &target, const FeatureExtractor &e,
                       const PGDConfig &cfg, const std::optional<PerturbationTensor> &init,
                       int steps);

/// |a - b| in absolute mode; |a - b| / b in relative mode with 0/0 = 0 and
/// x/0 = +inf for x > 0. `cur` = distance for the current frame carrying the
/// previous delta, `prev` = distance for the previous frame.
double route_value(double cur, double prev, RoutingMode mode);

double route_distance(const Frame &prev_frame, const Frame &cur_frame,
                      const PerturbationTensor &prev_delta, const Embedding &target,
                      const FeatureExtractor &e, RoutingMode mode);

struct SceneProtection {
  std::vector<PerturbationTensor> deltas;
  ProtectionTrace trace;
};

/// Progressive protection of one scene toward a shared target. Frame 0 is
/// optimized from zero; later frames reuse, continue from, or recompute the
/// previous perturbation according to d_i against tau1 / tau2.
SceneProtection protect_scene(std::span<const Frame> scene_frames, const Frame &target,
                              const FeatureExtractor &e, const PGDConfig &pgd,
                              const RoutingConfig &routing, std::size_t first_index = 0);

struct VideoProtectionConfig {
  TargetSpec target;
  PGDConfig pgd;
  RoutingConfig routing;
  unsigned threads = 1;
};

struct VideoProtection {
  FrameSequence output;
  std::vector<PerturbationTensor> deltas;
  /// One per scene; empty for naive protection.
  std::vector<Frame> targets;
  SceneManifest manifest;
  ProtectionTrace trace;
};

VideoProtection protect_video(const FrameSequence &seq, const SceneManifest &manifest,
                              const FeatureExtractor &e, const VideoProtectionConfig &cfg);

/// Target for frame i under naive protection:
/// blend(clip(F_i + U(-a, a) noise seeded by rng_seed + i * stride), style).
Frame naive_target(const Frame &frame, std::size_t index, const PGDConfig &pgd,
                   std::uint64_t seed_stride, const TargetSpec &style);

/// Every frame protected independently toward its own randomized target.
VideoProtection protect_video_naive(const FrameSequence &seq, const FeatureExtractor &e,
                                    const PGDConfig &pgd, std::uint64_t seed_stride = 1,
                                    const TargetSpec &style = {}, unsigned threads = 1);

/// Writes `frame_%06d.png` outputs, `deltas/delta_%06d.fvdt`,
/// `targets/scene_%03d.png`, `manifest.json` (with target paths) and the
/// trace JSON under `out_dir`.
void write_protection(const VideoProtection &p, const fs::path &out_dir,
                      const fs::path &trace_path);

} // namespace scenecloak
