#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "scenecloak/encoder.hpp"
#include "scenecloak/frameio.hpp"
#include "scenecloak/image.hpp"
#include "scenecloak/protect.hpp"
#include "scenecloak/target.hpp"

namespace scenecloak {

struct AveragingConfig {
  /// Odd window length, >= 3.
  int window = 5;
  /// Explicit threshold, or nullopt for automatic selection per window.
  std::optional<double> epsilon_p;

  void validate() const;
};

/*
 * Threshold separating movement from perturbation in consecutive-frame
 * differences.
 *
 * All nonzero per-channel |F[i] - F[i-1]| values go into a 1024-bin
 * histogram over [0, 1] and Otsu's between-class variance picks the split
 * (midpoint of the maximizing plateau). The split is kept only when the two
 * classes are separated: the 1st percentile of the upper class must be at
 * least kModeSeparation times the 99th percentile of the lower class.
 * Otherwise the differences form one population, all of it perturbation,
 * and the threshold is placed just above the largest difference.
 *
 * Throws DegenerateError when every difference is zero.
 */
double select_epsilon_p(std::span<const Frame> frames);

inline constexpr double kModeSeparation = 2.0;

/// Selective average: each value of the center frame is averaged with the
/// window values v that satisfy |v - center| < epsilon_p.
Frame pixel_average(std::span<const Frame> window, std::size_t center, double epsilon_p);

/// (1 - alpha) a + alpha b.
Frame linear_interpolate(const Frame &a, const Frame &b, double alpha);

class QualityScorer {
public:
  virtual ~QualityScorer() = default;
  virtual double score(const Frame &frame) const = 0;
};

/// Variance of the 4-neighbour Laplacian of luma (channel mean) over
/// interior pixels.
class SharpnessScorer final : public QualityScorer {
public:
  double score(const Frame &frame) const override;
};

/// Scorer hosted behind the encoder protocol; the 1-D embedding is the score.
class ExternalScorer final : public QualityScorer {
public:
  explicit ExternalScorer(std::unique_ptr<FeatureExtractor> scorer);
  double score(const Frame &frame) const override;

private:
  std::unique_ptr<FeatureExtractor> scorer_;
};

struct RemovalResult {
  /// Every frame replaced by its selective average over the window clipped
  /// to its scene.
  FrameSequence recovered;
  /// Highest-quality protected frame per scene (lowest index on ties).
  std::vector<std::size_t> chosen;
  /// Threshold used per frame; NaN where the window held identical frames.
  std::vector<double> epsilon_used;
};

RemovalResult remove_perturbations(const FrameSequence &seq, const SceneManifest &manifest,
                                   const AveragingConfig &cfg, const QualityScorer &scorer,
                                   unsigned threads = 1);

struct SceneSplitAttackConfig {
  /// First frame of the second subscene, relative to the scene start.
  std::size_t split_index = 0;
  /// Frames per subscene; 0 takes everything up to the scene edges.
  std::size_t subscene_len = 0;
};

struct SceneSplitResult {
  Frame target_first;
  Frame target_second;
  double target_distance = 0.0;
  /// Protected frames adjacent to the split, before and after averaging.
  Frame protected_before;
  Frame protected_after;
  Frame recovered_before;
  Frame recovered_after;
  /// Means over the two split-adjacent frames against the originals.
  double attacked_latent_l2 = 0.0;
  double attacked_mpd = 0.0;
  double unattacked_latent_l2 = 0.0;
  double unattacked_mpd = 0.0;
};

/// Forces a scene break at `split_index`, protects the two subscenes toward
/// targets picked to be as far apart as possible, then pixel-averages the
/// two frames across the break. The unattacked reference protects the whole
/// scene with one target.
SceneSplitResult scene_split_attack(std::span<const Frame> scene_frames,
                                    const SceneSplitAttackConfig &cfg, const TargetSpec &spec,
                                    const PGDConfig &pgd, const RoutingConfig &routing,
                                    const FeatureExtractor &e,
                                    std::optional<double> epsilon_p = std::nullopt);

} // namespace scenecloak
