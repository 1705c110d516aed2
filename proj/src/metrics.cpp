#include "scenecloak/metrics.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace scenecloak {

double latent_l2(const Frame &a, const Frame &b, const FeatureExtractor &e) {
  require_same_shape(a, b, "latent_l2");
  return distance(e.encode(a), e.encode(b));
}

SpeedupReport speedup_report(const ProtectionTrace &trace, double naive_seconds_per_frame) {
  if (trace.records.empty()) {
    throw ValidationError("speedup_report: empty trace");
  }
  if (!(naive_seconds_per_frame > 0.0)) {
    throw ValidationError("naive seconds per frame must be positive");
  }
  const double total = trace.total_wall_time();
  if (!(total > 0.0)) {
    throw DegenerateError("speedup_report: zero total protection time");
  }
  const double n = static_cast<double>(trace.records.size());
  return {naive_seconds_per_frame * n / total, total / n};
}

double work_speedup(const ProtectionTrace &trace) {
  if (trace.records.empty()) {
    throw ValidationError("work_speedup: empty trace");
  }
  const auto total = trace.total_work();
  if (total <= 0) {
    throw DegenerateError("work_speedup: zero recorded work");
  }
  return static_cast<double>(trace.naive_work_per_frame()) *
         static_cast<double>(trace.records.size()) / static_cast<double>(total);
}

Eigen::VectorXd color_histogram(const Frame &frame) {
  constexpr int kBins = 16;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(kBins * kChannels);
  const Index pixels = frame.height() * frame.width();
  for (Index p = 0; p < pixels; ++p) {
    for (Index c = 0; c < kChannels; ++c) {
      const double v = frame.values()[p * kChannels + c];
      const int bin = std::clamp(static_cast<int>(std::floor(v * kBins)), 0, kBins - 1);
      h[c * kBins + bin] += 1.0;
    }
  }
  return h / static_cast<double>(pixels);
}

HistogramGenreClassifier::HistogramGenreClassifier(
    const std::map<std::string, std::vector<Frame>> &exemplars) {
  if (exemplars.size() < 2) {
    throw ValidationError("genre classifier needs at least two genres");
  }
  for (const auto &[name, frames] : exemplars) {
    if (frames.empty()) {
      throw ValidationError("genre '" + name + "' has no exemplars");
    }
    Eigen::VectorXd c = Eigen::VectorXd::Zero(16 * kChannels);
    for (const auto &f : frames) {
      c += color_histogram(f);
    }
    names_.push_back(name);
    centroids_.push_back(c / static_cast<double>(frames.size()));
  }
}

std::string HistogramGenreClassifier::predict(const Frame &frame) const {
  const Eigen::VectorXd h = color_histogram(frame);
  std::size_t best = 0;
  double best_d = (h - centroids_[0]).squaredNorm();
  for (std::size_t g = 1; g < centroids_.size(); ++g) {
    const double d = (h - centroids_[g]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = g;
    }
  }
  return names_[best];
}

ExternalGenreClassifier::ExternalGenreClassifier(std::unique_ptr<FeatureExtractor> scorer,
                                                 std::vector<std::string> genres)
    : scorer_(std::move(scorer)), names_(std::move(genres)) {
  if (names_.size() < 2) {
    throw ValidationError("genre classifier needs at least two genres");
  }
  if (scorer_->dim() != static_cast<Index>(names_.size())) {
    throw ProtocolError("external classifier reports " + std::to_string(scorer_->dim()) +
                        " scores for " + std::to_string(names_.size()) + " genres");
  }
}

std::string ExternalGenreClassifier::predict(const Frame &frame) const {
  const Embedding scores = scorer_->encode(frame);
  Index best = 0;
  for (Index g = 1; g < scores.dim(); ++g) {
    if (scores.values[g] > scores.values[best]) {
      best = g;
    }
  }
  return names_[static_cast<std::size_t>(best)];
}

double genre_shift(std::span<const Frame> frames, const std::string &truth,
                   const GenreClassifier &classifier) {
  if (frames.empty()) {
    throw ValidationError("genre_shift: no frames");
  }
  if (classifier.genres().size() < 2) {
    throw ValidationError("genre_shift: need at least two genres");
  }
  std::size_t wrong = 0;
  for (const auto &f : frames) {
    wrong += classifier.predict(f) != truth ? 1 : 0;
  }
  return static_cast<double>(wrong) / static_cast<double>(frames.size());
}

Stat summarize(std::span<const double> values) {
  if (values.empty()) {
    return {};
  }
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) {
    sq += (v - mean) * (v - mean);
  }
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

EvalReport evaluate(const FrameSequence &original, const FrameSequence &candidate,
                    const FeatureExtractor &e, const EvalOptions &opts) {
  validate_sequence(original);
  validate_sequence(candidate);
  if (original.size() != candidate.size()) {
    throw ValidationError("original has " + std::to_string(original.size()) +
                          " frames, candidate " + std::to_string(candidate.size()));
  }
  EvalReport r;
  r.encoder_id = e.id();
  for (std::size_t i = 0; i < original.size(); ++i) {
    r.latent_l2.push_back(latent_l2(original.frames[i], candidate.frames[i], e));
    r.mpd.push_back(mpd(original.frames[i], candidate.frames[i]));
  }
  r.latent_l2_stat = summarize(r.latent_l2);
  r.mpd_stat = summarize(r.mpd);
  if (opts.trace != nullptr && !opts.trace->records.empty()) {
    const ProtectionTrace &t = *opts.trace;
    r.speedup_factor = work_speedup(t);
    r.work_units_per_frame =
        static_cast<double>(t.total_work()) / static_cast<double>(t.records.size());
    r.decisions = t.counts();
    if (opts.naive_seconds_per_frame > 0.0) {
      const auto s = speedup_report(t, opts.naive_seconds_per_frame);
      r.wall_speedup_factor = s.speedup_factor;
      r.seconds_per_frame = s.seconds_per_frame;
    }
  }
  return r;
}

std::string report_to_json(const EvalReport &r) {
  nlohmann::ordered_json j;
  j["encoder"] = r.encoder_id;
  j["frames"] = r.latent_l2.size();
  j["latent_l2"] = {{"mean", r.latent_l2_stat.mean}, {"std", r.latent_l2_stat.std}};
  j["mpd"] = {{"mean", r.mpd_stat.mean}, {"std", r.mpd_stat.std}};
  if (r.speedup_factor) {
    j["speedup"] = {{"basis", "encoder_passes"},
                    {"factor", *r.speedup_factor},
                    {"work_units_per_frame", *r.work_units_per_frame}};
  }
  if (r.wall_speedup_factor) {
    j["wall_clock"] = {{"speedup_factor", *r.wall_speedup_factor},
                       {"seconds_per_frame", *r.seconds_per_frame}};
  }
  if (r.decisions) {
    j["decisions"] = {
        {"full", r.decisions->full}, {"continue", r.decisions->cont}, {"reuse", r.decisions->reuse}};
  }
  if (r.genre_shift) {
    j["genre_shift"] = *r.genre_shift;
  }
  j["per_frame"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.latent_l2.size(); ++i) {
    j["per_frame"].push_back({{"index", i}, {"latent_l2", r.latent_l2[i]}, {"mpd", r.mpd[i]}});
  }
  return j.dump(2) + "\n";
}

} // namespace scenecloak
