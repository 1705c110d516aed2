#include "scenecloak/calibrate.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "parallel.hpp"
#include "scenecloak/metrics.hpp"

namespace scenecloak {

std::vector<double> default_tau1_grid() { return {0.01, 0.04, 0.07, 0.10, 0.16}; }
std::vector<double> default_tau2_grid() { return {0.2, 0.4, 0.6, 0.8, 1.0}; }

std::vector<TauGridRow> grid_search_taus(const FrameSequence &seq, const SceneManifest &manifest,
                                         const FeatureExtractor &e,
                                         const std::vector<double> &tau1_grid,
                                         const std::vector<double> &tau2_grid,
                                         const VideoProtectionConfig &base, unsigned threads) {
  if (tau1_grid.empty() || tau2_grid.empty()) {
    throw ValidationError("tau grids must be non-empty");
  }
  std::vector<TauGridRow> rows;
  for (double t1 : tau1_grid) {
    for (double t2 : tau2_grid) {
      if (t1 >= 0.0 && t1 < t2) {
        rows.push_back({t1, t2, 0.0, 0.0, {}});
      }
    }
  }
  if (rows.empty()) {
    throw ValidationError("no (tau1, tau2) pair with 0 <= tau1 < tau2");
  }
  std::sort(rows.begin(), rows.end(), [](const TauGridRow &a, const TauGridRow &b) {
    return a.tau1 != b.tau1 ? a.tau1 < b.tau1 : a.tau2 < b.tau2;
  });
  rows.erase(std::unique(rows.begin(), rows.end(),
                         [](const TauGridRow &a, const TauGridRow &b) {
                           return a.tau1 == b.tau1 && a.tau2 == b.tau2;
                         }),
             rows.end());

  parallel_for(rows.size(), threads, [&](std::size_t k) {
    VideoProtectionConfig cfg = base;
    cfg.routing.tau1 = rows[k].tau1;
    cfg.routing.tau2 = rows[k].tau2;
    cfg.threads = 1;
    const auto p = protect_video(seq, manifest, e, cfg);
    double sum = 0.0;
    for (const auto &r : p.trace.records) {
      sum += r.final_distance;
    }
    rows[k].mean_final_distance = sum / static_cast<double>(p.trace.records.size());
    rows[k].speedup = work_speedup(p.trace);
    rows[k].decisions = p.trace.counts();
  });
  return rows;
}

std::vector<WindowRow> sweep_window_protected(const FrameSequence &original,
                                              const FrameSequence &protected_seq,
                                              const SceneManifest &manifest,
                                              const FeatureExtractor &e,
                                              const std::vector<int> &n_grid,
                                              std::optional<double> epsilon_p, unsigned threads) {
  if (n_grid.empty()) {
    throw ValidationError("window grid must be non-empty");
  }
  if (original.size() != protected_seq.size()) {
    throw ValidationError("original and protected sequences differ in length");
  }
  const SharpnessScorer scorer;
  std::vector<WindowRow> rows;
  for (int n : n_grid) {
    const FrameSequence *candidate = &protected_seq;
    RemovalResult removed;
    if (n != 1) {
      removed = remove_perturbations(protected_seq, manifest, {n, epsilon_p}, scorer, threads);
      candidate = &removed.recovered;
    }
    std::vector<double> l2(original.size());
    std::vector<double> px(original.size());
    parallel_for(original.size(), threads, [&](std::size_t i) {
      l2[i] = latent_l2(candidate->frames[i], original.frames[i], e);
      px[i] = mpd(candidate->frames[i], original.frames[i]);
    });
    rows.push_back({n, summarize(l2).mean, summarize(px).mean});
  }
  return rows;
}

std::vector<WindowRow> sweep_window(const FrameSequence &seq, const SceneManifest &manifest,
                                    const FeatureExtractor &e, const std::vector<int> &n_grid,
                                    const PGDConfig &pgd, const TargetSpec &style,
                                    std::optional<double> epsilon_p, unsigned threads) {
  const auto naive = protect_video_naive(seq, e, pgd, 1, style, threads);
  return sweep_window_protected(seq, naive.output, manifest, e, n_grid, epsilon_p, threads);
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

} // namespace

std::string tau_grid_csv(const std::vector<TauGridRow> &rows) {
  std::ostringstream out;
  out << "tau1,tau2,mean_final_distance,speedup,full,continue,reuse\n";
  for (const auto &r : rows) {
    out << num(r.tau1) << ',' << num(r.tau2) << ',' << num(r.mean_final_distance) << ','
        << num(r.speedup) << ',' << r.decisions.full << ',' << r.decisions.cont << ','
        << r.decisions.reuse << '\n';
  }
  return out.str();
}

std::string window_csv(const std::vector<WindowRow> &rows) {
  std::ostringstream out;
  out << "n,latent_l2,mpd\n";
  for (const auto &r : rows) {
    out << r.window << ',' << num(r.latent_l2) << ',' << num(r.mpd) << '\n';
  }
  return out.str();
}

} // namespace scenecloak
