#include "scenecloak/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parallel.hpp"
#include "scenecloak/metrics.hpp"

namespace scenecloak {

namespace {

constexpr int kBins = 1024;

double quantile(std::vector<double> values, double q) {
  const auto k = static_cast<std::size_t>(q * static_cast<double>(values.size() - 1));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

// Edge index maximizing between-class variance, or -1 when all mass sits in
// one bin. Returns the plateau midpoint in threshold units.
double otsu_threshold(const std::vector<double> &counts) {
  const int bins = static_cast<int>(counts.size());
  double total = 0.0;
  double total_sum = 0.0;
  for (int b = 0; b < bins; ++b) {
    total += counts[b];
    total_sum += counts[b] * (b + 0.5);
  }
  double w0 = 0.0;
  double sum0 = 0.0;
  double best = -1.0;
  int first = -1;
  int last = -1;
  for (int k = 1; k < bins; ++k) {
    w0 += counts[k - 1];
    sum0 += counts[k - 1] * (k - 0.5);
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) {
      continue;
    }
    const double mu0 = sum0 / w0;
    const double mu1 = (total_sum - sum0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best * (1.0 + 1e-12)) {
      best = between;
      first = last = k;
    } else if (k == last + 1 && between >= best * (1.0 - 1e-12)) {
      last = k;
    }
  }
  if (first < 0) {
    return -1.0;
  }
  return 0.5 * (first + last) / bins;
}

} // namespace

void AveragingConfig::validate() const {
  if (window < 3 || window % 2 == 0) {
    throw ValidationError("averaging window must be odd and >= 3");
  }
  if (epsilon_p && !(*epsilon_p > 0.0)) {
    throw ValidationError("epsilon_p must be positive");
  }
}

double select_epsilon_p(std::span<const Frame> frames) {
  if (frames.size() < 2) {
    throw ValidationError("select_epsilon_p needs at least two frames");
  }
  std::vector<double> diffs;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    require_same_shape(frames[i], frames[i - 1], "select_epsilon_p");
    const Eigen::ArrayXd d = (frames[i].values() - frames[i - 1].values()).abs();
    for (Index j = 0; j < d.size(); ++j) {
      if (d[j] > 0.0) {
        diffs.push_back(d[j]);
      }
    }
  }
  if (diffs.empty()) {
    throw DegenerateError("frames are identical; no threshold separates anything");
  }

  std::vector<double> counts(kBins, 0.0);
  for (double v : diffs) {
    counts[std::min(kBins - 1, static_cast<int>(v * kBins))] += 1.0;
  }
  const double max_diff = *std::max_element(diffs.begin(), diffs.end());
  const double above_all = std::min(max_diff + 1e-6, std::nextafter(1.0, 0.0));

  const double t = otsu_threshold(counts);
  if (t <= 0.0) {
    return above_all;
  }
  std::vector<double> lower;
  std::vector<double> upper;
  for (double v : diffs) {
    (v < t ? lower : upper).push_back(v);
  }
  if (lower.empty() || upper.empty()) {
    return above_all;
  }
  const double lower_top = quantile(lower, 0.99);
  const double upper_bottom = quantile(upper, 0.01);
  if (upper_bottom < kModeSeparation * lower_top) {
    return above_all;
  }
  return t;
}

Frame pixel_average(std::span<const Frame> window, std::size_t center, double epsilon_p) {
  if (center >= window.size()) {
    throw ValidationError("pixel_average: center outside window");
  }
  const Frame &c = window[center];
  Eigen::ArrayXd sum = c.values();
  Eigen::ArrayXd count = Eigen::ArrayXd::Ones(c.size());
  for (std::size_t k = 0; k < window.size(); ++k) {
    if (k == center) {
      continue;
    }
    require_same_shape(window[k], c, "pixel_average");
    const auto include = ((window[k].values() - c.values()).abs() < epsilon_p).cast<double>();
    sum += include * window[k].values();
    count += include;
  }
  return Frame(c.height(), c.width(), sum / count);
}

Frame linear_interpolate(const Frame &a, const Frame &b, double alpha) {
  require_same_shape(a, b, "linear_interpolate");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha must lie in [0, 1]");
  }
  return Frame(a.height(), a.width(), (1.0 - alpha) * a.values() + alpha * b.values());
}

double SharpnessScorer::score(const Frame &frame) const {
  const Index h = frame.height();
  const Index w = frame.width();
  if (h < 3 || w < 3) {
    return 0.0;
  }
  Eigen::ArrayXXd luma(h, w);
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      luma(y, x) = (frame(y, x, 0) + frame(y, x, 1) + frame(y, x, 2)) / 3.0;
    }
  }
  const Eigen::ArrayXXd lap = luma.block(0, 1, h - 2, w - 2) + luma.block(2, 1, h - 2, w - 2) +
                              luma.block(1, 0, h - 2, w - 2) + luma.block(1, 2, h - 2, w - 2) -
                              4.0 * luma.block(1, 1, h - 2, w - 2);
  return (lap - lap.mean()).square().mean();
}

ExternalScorer::ExternalScorer(std::unique_ptr<FeatureExtractor> scorer)
    : scorer_(std::move(scorer)) {
  if (scorer_->dim() != 1) {
    throw ProtocolError("external quality scorer must report dim 1");
  }
}

double ExternalScorer::score(const Frame &frame) const { return scorer_->encode(frame).values[0]; }

RemovalResult remove_perturbations(const FrameSequence &seq, const SceneManifest &manifest,
                                   const AveragingConfig &cfg, const QualityScorer &scorer,
                                   unsigned threads) {
  validate_sequence(seq);
  validate_manifest(manifest);
  cfg.validate();
  if (manifest.total_frames != seq.size()) {
    throw ValidationError("manifest does not cover the sequence");
  }
  const std::size_t n = seq.size();
  const std::size_t half = static_cast<std::size_t>(cfg.window / 2);

  std::vector<std::size_t> scene_of(n);
  for (std::size_t s = 0; s < manifest.scenes.size(); ++s) {
    for (std::size_t i = manifest.scenes[s].start; i < manifest.scenes[s].end; ++i) {
      scene_of[i] = s;
    }
  }

  RemovalResult out;
  out.recovered.fps = seq.fps;
  out.recovered.source_id = seq.source_id;
  out.recovered.frames.resize(n);
  out.epsilon_used.assign(n, std::numeric_limits<double>::quiet_NaN());
  parallel_for(n, threads, [&](std::size_t i) {
    const auto &scene = manifest.scenes[scene_of[i]];
    const std::size_t lo = std::max(scene.start, i >= half ? i - half : 0);
    const std::size_t hi = std::min(scene.end, i + half + 1);
    std::span<const Frame> window(seq.frames.data() + lo, hi - lo);
    if (window.size() < 2) {
      out.recovered.frames[i] = seq.frames[i];
      return;
    }
    double eps = 0.0;
    if (cfg.epsilon_p) {
      eps = *cfg.epsilon_p;
    } else {
      try {
        eps = select_epsilon_p(window);
      } catch (const DegenerateError &) {
        out.recovered.frames[i] = seq.frames[i];
        return;
      }
    }
    out.epsilon_used[i] = eps;
    out.recovered.frames[i] = pixel_average(window, i - lo, eps);
  });

  for (const auto &scene : manifest.scenes) {
    std::size_t best = scene.start;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = scene.start; i < scene.end; ++i) {
      const double s = scorer.score(seq.frames[i]);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    out.chosen.push_back(best);
  }
  return out;
}

SceneSplitResult scene_split_attack(std::span<const Frame> scene_frames,
                                    const SceneSplitAttackConfig &cfg, const TargetSpec &spec,
                                    const PGDConfig &pgd, const RoutingConfig &routing,
                                    const FeatureExtractor &e, std::optional<double> epsilon_p) {
  const std::size_t len = scene_frames.size();
  if (cfg.split_index == 0 || cfg.split_index >= len) {
    throw ValidationError("split index " + std::to_string(cfg.split_index) +
                          " leaves an empty subscene in a scene of " + std::to_string(len));
  }
  const std::size_t m = cfg.subscene_len;
  const std::size_t first_lo = m == 0 ? 0 : cfg.split_index - std::min(m, cfg.split_index);
  const std::size_t second_hi = m == 0 ? len : std::min(len, cfg.split_index + m);
  std::span<const Frame> first = scene_frames.subspan(first_lo, cfg.split_index - first_lo);
  std::span<const Frame> second = scene_frames.subspan(cfg.split_index, second_hi - cfg.split_index);

  // Candidate targets: every base method plus the frame at the split.
  auto candidates = [&](std::span<const Frame> frames, const Frame &adjacent) {
    std::vector<Frame> out;
    for (BaseMethod m : {BaseMethod::SceneAverage, BaseMethod::MiddleFrame,
                         BaseMethod::EmbeddingMedoid}) {
      TargetSpec s = spec;
      s.base_method = m;
      out.push_back(make_target(frames, s, &e));
    }
    out.push_back(blend_target(adjacent, spec));
    return out;
  };
  const auto c1 = candidates(first, first.back());
  const auto c2 = candidates(second, second.front());
  std::vector<Embedding> e2;
  for (const auto &t : c2) {
    e2.push_back(e.encode(t));
  }

  SceneSplitResult r;
  std::size_t pick1 = 0;
  std::size_t pick2 = 0;
  r.target_distance = -1.0;
  for (std::size_t a = 0; a < c1.size(); ++a) {
    const Embedding ea = e.encode(c1[a]);
    for (std::size_t b = 0; b < c2.size(); ++b) {
      const double d = distance(ea, e2[b]);
      if (d > r.target_distance) {
        r.target_distance = d;
        pick1 = a;
        pick2 = b;
      }
    }
  }
  r.target_first = c1[pick1];
  r.target_second = c2[pick2];

  const auto p1 = protect_scene(first, r.target_first, e, pgd, routing);
  const auto p2 = protect_scene(second, r.target_second, e, pgd, routing);
  const Frame &orig_before = first.back();
  const Frame &orig_after = second.front();
  r.protected_before = apply_perturbation(orig_before, p1.deltas.back());
  r.protected_after = apply_perturbation(orig_after, p2.deltas.front());

  const std::vector<Frame> pair{r.protected_before, r.protected_after};
  std::optional<double> eps = epsilon_p;
  if (!eps) {
    try {
      eps = select_epsilon_p(pair);
    } catch (const DegenerateError &) {
      eps.reset();
    }
  }
  if (eps) {
    r.recovered_before = pixel_average(pair, 0, *eps);
    r.recovered_after = pixel_average(pair, 1, *eps);
  } else {
    r.recovered_before = r.protected_before;
    r.recovered_after = r.protected_after;
  }

  const Frame whole_target = make_target(scene_frames, spec, &e);
  const auto whole = protect_scene(scene_frames, whole_target, e, pgd, routing);
  const Frame ref_before = apply_perturbation(orig_before, whole.deltas[cfg.split_index - 1]);
  const Frame ref_after = apply_perturbation(orig_after, whole.deltas[cfg.split_index]);

  r.attacked_latent_l2 = 0.5 * (latent_l2(r.recovered_before, orig_before, e) +
                                latent_l2(r.recovered_after, orig_after, e));
  r.attacked_mpd = 0.5 * (mpd(r.recovered_before, orig_before) + mpd(r.recovered_after, orig_after));
  r.unattacked_latent_l2 =
      0.5 * (latent_l2(ref_before, orig_before, e) + latent_l2(ref_after, orig_after, e));
  r.unattacked_mpd = 0.5 * (mpd(ref_before, orig_before) + mpd(ref_after, orig_after));
  return r;
}

} // namespace scenecloak
