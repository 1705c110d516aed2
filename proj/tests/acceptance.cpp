// Acceptance run on the synthetic corpus with the builtin surrogate, seed 42.
// One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "scenecloak/cli.hpp"
#include "scenecloak/scenecloak.hpp"

using namespace scenecloak;

namespace {

constexpr std::uint64_t kSeed = 42;

unsigned workers() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

Frame uniform_frame(Index h, Index w, std::mt19937_64 &gen, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Frame f(h, w);
  for (Index i = 0; i < f.size(); ++i) {
    f.values()[i] = u(gen);
  }
  return f;
}

FrameSequence static_scene(std::size_t len = 50) {
  SynthParams p;
  p.kind = SynthKind::Static;
  p.length = len;
  p.seed = kSeed;
  return synth_corpus(p).sequence;
}

struct Damage {
  double mpd = 0.0;
  double l2 = 0.0;
};

Damage damage(const FrameSequence &orig, const FrameSequence &cand, const FeatureExtractor &e) {
  Damage d;
  for (std::size_t i = 0; i < orig.size(); ++i) {
    d.mpd += mpd(cand.frames[i], orig.frames[i]);
    d.l2 += latent_l2(cand.frames[i], orig.frames[i], e);
  }
  d.mpd /= static_cast<double>(orig.size());
  d.l2 /= static_cast<double>(orig.size());
  return d;
}

FrameSequence attack(const FrameSequence &prot, int n) {
  return remove_perturbations(prot, whole_sequence_manifest(prot.size()), {n, std::nullopt},
                              SharpnessScorer{}, workers())
      .recovered;
}

Outcome gradient_check() {
  const SurrogateEncoder enc({kSeed, 4, 192}, 32, 32);
  std::mt19937_64 gen(kSeed);
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Frame f = uniform_frame(32, 32, gen, 0.05, 0.95);
    const Embedding t = enc.encode(uniform_frame(32, 32, gen, 0.0, 1.0));
    const Image<double> g = grad_distance(f, t, enc);
    Image<double> fd(32, 32);
    Frame x = f;
    for (Index i = 0; i < x.size(); ++i) {
      const double v = x.values()[i];
      x.values()[i] = v + h;
      const double up = distance(enc.encode(x), t);
      x.values()[i] = v - h;
      const double down = distance(enc.encode(x), t);
      x.values()[i] = v;
      fd.values()[i] = (up - down) / (2.0 * h);
    }
    const double rel = (g.values() - fd.values()).matrix().norm() / fd.values().matrix().norm();
    worst = std::max(worst, rel);
  }
  return {worst < 1e-4, fmt("worst relative error %.3g over 10 pairs", worst)};
}

Outcome pgd_oracle() {
  const IdentityEncoder enc(8, 8);
  std::mt19937_64 gen(kSeed);
  PGDConfig cfg;
  cfg.budget = 0.07f;
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Frame f = uniform_frame(8, 8, gen, 0.0, 1.0);
    const Frame t = uniform_frame(8, 8, gen, 0.0, 1.0);
    const auto r = pgd_optimize(f, t, enc, cfg, std::nullopt, 300);
    const Eigen::ArrayXd want = (t.values() - f.values()).cwiseMax(-0.07).cwiseMin(0.07);
    worst = std::max(worst, (r.delta.deltas.values().cast<double>() - want).abs().maxCoeff());
  }
  return {worst <= 1e-5, fmt("max |delta - clip(target - frame)| = %.3g", worst)};
}

Outcome budget_and_range() {
  const SurrogateEncoder enc({kSeed, 4, 256}, 64, 64);
  double worst = 0.0;
  bool in_range = true;
  std::size_t frames = 0;
  for (auto kind : {SynthKind::Static, SynthKind::Pan, SynthKind::JumpCut, SynthKind::NoiseMotion}) {
    SynthParams p;
    p.kind = kind;
    p.seed = kSeed;
    const auto seq = synth_corpus(p).sequence;
    VideoProtectionConfig cfg;
    cfg.target.style_image = checkerboard(64, 64);
    cfg.threads = workers();
    PGDConfig pgd;
    pgd.rng_seed = kSeed;
    cfg.pgd = pgd;
    const auto framework = protect_video(seq, partition(seq, {}), enc, cfg);
    const auto naive = protect_video_naive(seq, enc, pgd, 1, {}, workers());
    for (const auto *out : {&framework.output, &naive.output}) {
      for (std::size_t i = 0; i < seq.size(); ++i) {
        const auto &o = out->frames[i].values();
        worst = std::max(worst, (o - seq.frames[i].values()).abs().maxCoeff());
        in_range = in_range && o.minCoeff() >= 0.0 && o.maxCoeff() <= 1.0;
        ++frames;
      }
    }
  }
  return {worst <= 0.07 + 1e-6 && in_range,
          fmt("%g frames, max |out - in| = %.9g, in [0,1]: %g", static_cast<double>(frames), worst,
              in_range ? 1.0 : 0.0)};
}

struct StaticRuns {
  FrameSequence orig;
  FrameSequence naive;
  FrameSequence framework;
};

const StaticRuns &static_runs() {
  static const StaticRuns runs = [] {
    StaticRuns r;
    r.orig = static_scene();
    const SurrogateEncoder enc({kSeed, 4, 256}, 64, 64);
    PGDConfig pgd;
    pgd.rng_seed = kSeed;
    r.naive = protect_video_naive(r.orig, enc, pgd, 1, {}, workers()).output;
    VideoProtectionConfig cfg;
    cfg.pgd = pgd;
    cfg.target.style_image = checkerboard(64, 64);
    cfg.threads = workers();
    r.framework = protect_video(r.orig, whole_sequence_manifest(r.orig.size()), enc, cfg).output;
    return r;
  }();
  return runs;
}

Outcome attack_breaks_naive() {
  const auto &r = static_runs();
  const SurrogateEncoder enc({kSeed, 4, 256}, 64, 64);
  const Damage before = damage(r.orig, r.naive, enc);
  const Damage after = damage(r.orig, attack(r.naive, 5), enc);
  const double dm = 1.0 - after.mpd / before.mpd;
  const double dl = 1.0 - after.l2 / before.l2;
  return {dm >= 0.15 && dl >= 0.15,
          fmt("MPD %.3f -> %.3f (-%.1f%%), latent L2 drop %.1f%%", before.mpd, after.mpd,
              100.0 * dm, 100.0 * dl)};
}

Outcome framework_resists() {
  const auto &r = static_runs();
  const SurrogateEncoder enc({kSeed, 4, 256}, 64, 64);
  const Damage before = damage(r.orig, r.framework, enc);
  const Damage after = damage(r.orig, attack(r.framework, 5), enc);
  const double dm = after.mpd / before.mpd - 1.0;
  const double dl = 1.0 - after.l2 / before.l2;
  return {std::abs(dm) <= 0.05 && dl <= 0.05,
          fmt("MPD %.3f -> %.3f (%+.2f%%), latent L2 drop %.2f%%", before.mpd, after.mpd,
              100.0 * dm, 100.0 * dl)};
}

Outcome routing_exactness() {
  constexpr std::size_t kJump = 40;
  const SurrogateEncoder enc({kSeed, 4, 256}, 64, 64);
  const auto seq = static_scene();
  PGDConfig pgd;
  pgd.rng_seed = kSeed;
  const RoutingConfig routing;
  const Frame target = make_target(seq.frames, {BaseMethod::SceneAverage, checkerboard(64, 64), 0.5});
  const auto p = protect_scene(seq.frames, target, enc, pgd, routing);
  bool shape = p.trace.records.front().decision == Decision::Full;
  for (std::size_t i = 1; i < p.trace.records.size(); ++i) {
    shape = shape && p.trace.records[i].decision == Decision::Reuse;
  }
  bool identical = true;
  for (const auto &d : p.deltas) {
    identical = identical && d == p.deltas.front();
  }

  // late jump to the inverted frame, kept inside one scene, so the target
  // stays near the first part
  std::vector<Frame> jumped(seq.frames.begin(), seq.frames.begin() + kJump);
  Frame other = seq.frames.front();
  other.values() = 1.0 - other.values();
  jumped.insert(jumped.end(), seq.size() - kJump, other);
  const Frame t2 = make_target(jumped, {BaseMethod::SceneAverage, checkerboard(64, 64), 0.5});
  const auto q = protect_scene(jumped, t2, enc, pgd, routing);
  const auto c = q.trace.counts();
  const bool jump_ok = c.full == 2 && c.cont == 0 && q.trace.records[kJump].decision == Decision::Full &&
                       q.trace.records[kJump].d > routing.tau2;
  return {shape && identical && jump_ok,
          fmt("static: full+reuse x49 %g, deltas identical %g; jump: full %g, d at jump %.3g",
              shape ? 1.0 : 0.0, identical ? 1.0 : 0.0, static_cast<double>(c.full),
              q.trace.records[kJump].d)};
}

Outcome speedup_accounting() {
  const SurrogateEncoder enc({kSeed, 4, 256}, 64, 64);
  PGDConfig pgd;
  pgd.rng_seed = kSeed;
  VideoProtectionConfig cfg;
  cfg.pgd = pgd;
  cfg.target.style_image = checkerboard(64, 64);
  cfg.threads = workers();
  const auto seq = static_scene();
  const double fast =
      work_speedup(protect_video(seq, whole_sequence_manifest(seq.size()), enc, cfg).trace);

  SynthParams mp;
  mp.kind = SynthKind::NoiseMotion;
  mp.seed = kSeed;
  const auto moving = synth_corpus(mp).sequence;
  cfg.routing.tau1 = 0.0;
  cfg.routing.tau2 = 1e-12;
  const auto all = protect_video(moving, whole_sequence_manifest(moving.size()), enc, cfg).trace;
  const bool all_full = all.counts().full == all.records.size();
  const double slow = work_speedup(all);
  return {fast >= 5.0 && all_full && std::abs(slow - 1.0) <= 0.1,
          fmt("static speedup %.2f, all-full speedup %.4f (all full %g)", fast, slow,
              all_full ? 1.0 : 0.0)};
}

Outcome partition_invariants() {
  SynthParams p;
  p.kind = SynthKind::JumpCut;
  p.scenes = 3;
  p.seed = kSeed;
  const auto corpus = synth_corpus(p);
  const ScenePartitionConfig cfg;
  const auto m = partition(corpus.sequence, cfg);
  const bool cuts_ok = m.scenes.size() == 3 && scene_boundaries(m) == corpus.cuts;
  double intra = 0.0;
  for (const auto &sc : m.scenes) {
    for (std::size_t i = sc.start + 1; i < sc.end; ++i) {
      intra = std::max(intra, mean_pixel_diff(corpus.sequence.frames[i],
                                              corpus.sequence.frames[i - 1]));
    }
  }
  const auto b8 = scene_boundaries(partition(corpus.sequence, {0.08}));
  const auto b4 = scene_boundaries(partition(corpus.sequence, {0.04}));
  const auto b2 = scene_boundaries(partition(corpus.sequence, {0.02}));
  const bool refine = std::includes(b4.begin(), b4.end(), b8.begin(), b8.end()) &&
                      std::includes(b2.begin(), b2.end(), b4.begin(), b4.end());
  std::ostringstream d;
  d << m.scenes.size() << " scenes, cuts at";
  for (auto c : scene_boundaries(m)) {
    d << ' ' << c;
  }
  d << ", max intra diff " << intra << " < " << cfg.epsilon_scene << ", refinement "
    << (refine ? "holds" : "broken");
  return {cuts_ok && intra < cfg.epsilon_scene && refine, d.str()};
}

Outcome target_base() {
  const SurrogateEncoder enc({kSeed, 4, 256}, 64, 64);
  int wins = 0;
  std::ostringstream d;
  for (std::uint64_t k = 0; k < 5; ++k) {
    SynthParams p;
    p.kind = SynthKind::Pan;
    p.seed = kSeed + k;
    const auto seq = synth_corpus(p).sequence;
    auto worst = [&](BaseMethod m) {
      const Embedding t = enc.encode(base_image(seq.frames, m));
      double w = 0.0;
      for (const auto &f : seq.frames) {
        w = std::max(w, distance(enc.encode(f), t));
      }
      return w;
    };
    const double avg = worst(BaseMethod::SceneAverage);
    const double mid = worst(BaseMethod::MiddleFrame);
    wins += avg <= mid ? 1 : 0;
    d << (k ? "; " : "") << fmt("%.3f vs %.3f", avg, mid);
  }
  return {wins >= 4, std::to_string(wins) + "/5 runs (average vs middle: " + d.str() + ")"};
}

Outcome window_sweep() {
  const auto &r = static_runs();
  const SurrogateEncoder enc({kSeed, 4, 256}, 64, 64);
  const auto rows = sweep_window_protected(r.orig, r.naive, whole_sequence_manifest(r.orig.size()),
                                           enc, {3, 5}, std::nullopt, workers());
  return {rows[1].latent_l2 < rows[0].latent_l2,
          fmt("latent L2 n=3 %.4f, n=5 %.4f", rows[0].latent_l2, rows[1].latent_l2)};
}

Outcome scene_split() {
  const SurrogateEncoder enc({kSeed, 4, 256}, 64, 64);
  const auto seq = static_scene();
  PGDConfig pgd;
  pgd.rng_seed = kSeed;
  const auto r = scene_split_attack(seq.frames, {25, 0},
                                    {BaseMethod::SceneAverage, checkerboard(64, 64), 0.5}, pgd, {},
                                    enc);
  const double ratio = r.attacked_mpd / r.unattacked_mpd;
  return {ratio >= 0.9, fmt("recovered MPD %.3f vs unattacked %.3f (%.1f%%)", r.attacked_mpd,
                            r.unattacked_mpd, 100.0 * ratio)};
}

Outcome grid_tradeoff() {
  const SurrogateEncoder enc({kSeed, 4, 256}, 64, 64);
  SynthParams mp;
  mp.kind = SynthKind::NoiseMotion;
  mp.length = 30;
  mp.speed = 2;
  mp.block = 24;
  mp.seed = kSeed;
  const auto seq = synth_corpus(mp).sequence;
  VideoProtectionConfig cfg;
  cfg.pgd.rng_seed = kSeed;
  cfg.target.style_image = checkerboard(64, 64);
  cfg.target.blend_lambda = 0.2;
  const double eps = 1e-6;
  const auto rows = grid_search_taus(seq, whole_sequence_manifest(seq.size()), enc, {0.0, 0.06},
                                     {eps, 0.45, 0.8}, cfg, workers());
  auto row = [&](double t1, double t2) {
    return *std::find_if(rows.begin(), rows.end(),
                         [&](const TauGridRow &r) { return r.tau1 == t1 && r.tau2 == t2; });
  };
  const auto strict = row(0.0, eps);
  const auto mid = row(0.06, 0.45);
  const auto loose = row(0.06, 0.8);
  const bool ok = strict.mean_final_distance <= mid.mean_final_distance &&
                  strict.speedup <= mid.speedup && loose.speedup > mid.speedup;
  return {ok, fmt("(0,eps) dist %.4f speedup %.3f; (0.06,0.45) dist %.4f speedup %.3f",
                  strict.mean_final_distance, strict.speedup, mid.mean_final_distance,
                  mid.speedup) +
                  fmt("; (0.06,0.8) speedup %.3f", loose.speedup)};
}

Outcome cli_determinism() {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("scenecloak_acceptance_" + std::to_string(getpid()));
  fs::remove_all(dir);
  auto cli = [](std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(args, out, err);
    return std::make_pair(code, out.str());
  };
  bool ok = cli({"synth", "jumpcut", "--scenes", "3", "--out", (dir / "in").string()}).first == 0;
  std::string reports[2];
  const char *threads[2] = {"1", "3"};
  for (int k = 0; k < 2 && ok; ++k) {
    const auto out = dir / ("p" + std::to_string(k));
    ok = cli({"protect", "--in", (dir / "in").string(), "--out", out.string(), "--threads",
              threads[k]})
             .first == 0;
    const auto r = cli({"evaluate", "--original", (dir / "in").string(), "--candidate",
                        out.string(), "--trace", (out / "trace.json").string(), "--threads",
                        threads[k]});
    ok = ok && r.first == 0;
    reports[k] = r.second;
  }
  fs::remove_all(dir);
  const bool same = ok && !reports[0].empty() && reports[0] == reports[1];
  return {same, same ? "threads 1 and 3 reports byte-identical (" +
                           std::to_string(reports[0].size()) + " bytes)"
                     : "reports differ or a command failed"};
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient vs finite differences", gradient_check},
      {"PGD identity oracle", pgd_oracle},
      {"budget and range", budget_and_range},
      {"attack breaks naive protection", attack_breaks_naive},
      {"framework resists the attack", framework_resists},
      {"routing and reuse exactness", routing_exactness},
      {"speedup accounting", speedup_accounting},
      {"scene partition invariants", partition_invariants},
      {"scene average base vs middle frame", target_base},
      {"averaging window n=5 vs n=3", window_sweep},
      {"scene-splitting attack", scene_split},
      {"tau grid tradeoff", grid_tradeoff},
      {"CLI determinism across threads", cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
