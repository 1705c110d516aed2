#pragma once

#include <string>
#include <vector>

#include "scenecloak/attack.hpp"
#include "scenecloak/protect.hpp"

namespace scenecloak {

struct TauGridRow {
  double tau1 = 0.0;
  double tau2 = 0.0;
  /// Mean over frames of the final distance to the scene target; lower
  /// means better optimized, more robust protection.
  double mean_final_distance = 0.0;
  /// Encoder-pass speedup over naive protection.
  double speedup = 0.0;
  DecisionCounts decisions;
};

/// Default grid: tau1 in {0.01, 0.04, 0.07, 0.10, 0.16}, tau2 in
/// {0.2, 0.4, 0.6, 0.8, 1.0}.
std::vector<double> default_tau1_grid();
std::vector<double> default_tau2_grid();

/// Runs protect_video for every (tau1, tau2) with tau1 < tau2, one cell per
/// worker. Rows are sorted by (tau1, tau2).
std::vector<TauGridRow> grid_search_taus(const FrameSequence &seq, const SceneManifest &manifest,
                                         const FeatureExtractor &e,
                                         const std::vector<double> &tau1_grid,
                                         const std::vector<double> &tau2_grid,
                                         const VideoProtectionConfig &base, unsigned threads = 1);

struct WindowRow {
  int window = 0;
  double latent_l2 = 0.0;
  double mpd = 0.0;
};

/// Naive-protects `seq` once, then attacks it with each window length and
/// records the mean latent L2 and MPD of the recovered frames against the
/// originals. n = 1 is the identity attack (the protected baseline).
std::vector<WindowRow> sweep_window(const FrameSequence &seq, const SceneManifest &manifest,
                                    const FeatureExtractor &e, const std::vector<int> &n_grid,
                                    const PGDConfig &pgd, const TargetSpec &style = {},
                                    std::optional<double> epsilon_p = std::nullopt,
                                    unsigned threads = 1);

/// Same sweep over an already protected sequence.
std::vector<WindowRow> sweep_window_protected(const FrameSequence &original,
                                              const FrameSequence &protected_seq,
                                              const SceneManifest &manifest,
                                              const FeatureExtractor &e,
                                              const std::vector<int> &n_grid,
                                              std::optional<double> epsilon_p = std::nullopt,
                                              unsigned threads = 1);

std::string tau_grid_csv(const std::vector<TauGridRow> &rows);
std::string window_csv(const std::vector<WindowRow> &rows);

} // namespace scenecloak
