#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scenecloak/encoder.hpp"
#include "scenecloak/image.hpp"
#include "scenecloak/protect.hpp"

namespace scenecloak {

/// distance(encode(a), encode(b)).
double latent_l2(const Frame &a, const Frame &b, const FeatureExtractor &e);

/// Mean absolute difference over all H*W*3 values, in 8-bit units (x255).
template <typename A, typename B> double mpd(const Image<A> &a, const Image<B> &b) {
  require_same_shape(a, b, "mpd");
  return 255.0 *
         (a.values().template cast<double>() - b.values().template cast<double>()).abs().mean();
}

struct SpeedupReport {
  double speedup_factor = 0.0;
  double seconds_per_frame = 0.0;
};

/// Wall-clock speedup: naive_seconds_per_frame * frames / sum(wall time).
SpeedupReport speedup_report(const ProtectionTrace &trace, double naive_seconds_per_frame);

/// Deterministic speedup in encoder passes: naive work per frame * frames /
/// sum(work units).
double work_speedup(const ProtectionTrace &trace);

class GenreClassifier {
public:
  virtual ~GenreClassifier() = default;
  /// Genre names in tie-break order.
  virtual const std::vector<std::string> &genres() const = 0;
  virtual std::string predict(const Frame &frame) const = 0;
};

/// Per-channel 16-bin color histogram, normalized to sum 1 per channel
/// (48 values). Bin = min(15, floor(16 v)).
Eigen::VectorXd color_histogram(const Frame &frame);

/// Nearest centroid over color histograms. Ties go to the genre that sorts
/// first.
class HistogramGenreClassifier final : public GenreClassifier {
public:
  explicit HistogramGenreClassifier(const std::map<std::string, std::vector<Frame>> &exemplars);

  const std::vector<std::string> &genres() const override { return names_; }
  std::string predict(const Frame &frame) const override;

private:
  std::vector<std::string> names_;
  std::vector<Eigen::VectorXd> centroids_;
};

/// Classifier hosted behind the encoder protocol: the embedding holds one
/// score per genre, in `genres` order, and the arg-max wins (first on ties).
class ExternalGenreClassifier final : public GenreClassifier {
public:
  ExternalGenreClassifier(std::unique_ptr<FeatureExtractor> scorer,
                          std::vector<std::string> genres);

  const std::vector<std::string> &genres() const override { return names_; }
  std::string predict(const Frame &frame) const override;

private:
  std::unique_ptr<FeatureExtractor> scorer_;
  std::vector<std::string> names_;
};

/// Fraction of frames whose predicted genre differs from `truth`.
double genre_shift(std::span<const Frame> frames, const std::string &truth,
                   const GenreClassifier &classifier);

struct Stat {
  double mean = 0.0;
  double std = 0.0; // population
};

Stat summarize(std::span<const double> values);

struct EvalReport {
  std::string encoder_id;
  std::vector<double> latent_l2;
  std::vector<double> mpd;
  Stat latent_l2_stat;
  Stat mpd_stat;
  std::optional<double> speedup_factor;        // encoder-pass basis
  std::optional<double> work_units_per_frame;
  std::optional<double> wall_speedup_factor;   // only when timing is requested
  std::optional<double> seconds_per_frame;
  std::optional<DecisionCounts> decisions;
  std::optional<double> genre_shift;
};

struct EvalOptions {
  const ProtectionTrace *trace = nullptr;
  /// When > 0 and a trace is given, wall-clock fields are filled too.
  double naive_seconds_per_frame = 0.0;
};

EvalReport evaluate(const FrameSequence &original, const FrameSequence &candidate,
                    const FeatureExtractor &e, const EvalOptions &opts = {});

std::string report_to_json(const EvalReport &r);

} // namespace scenecloak
