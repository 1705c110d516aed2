#include "scenecloak/protect.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "parallel.hpp"
#include "scenecloak/rng.hpp"

namespace scenecloak {

void PGDConfig::validate() const {
  if (!(budget > 0.0f && budget <= 0.25f)) {
    throw ValidationError("budget p must lie in (0, 0.25]");
  }
  if (steps_full < 0 || steps_continue < 0 || steps_continue > steps_full) {
    throw ValidationError("need 0 <= steps_continue <= steps_full");
  }
  if (!(effective_step() > 0.0)) {
    throw ValidationError("step_size must be positive");
  }
  if (patience < 0) {
    throw ValidationError("patience must be non-negative");
  }
  if (!(naive_noise >= 0.0)) {
    throw ValidationError("naive noise amplitude must be non-negative");
  }
  if (naive_noise_cell < 1) {
    throw ValidationError("naive noise cell must be at least 1 pixel");
  }
}

RoutingMode parse_routing_mode(const std::string &name) {
  if (name == "relative") {
    return RoutingMode::Relative;
  }
  if (name == "absolute") {
    return RoutingMode::Absolute;
  }
  throw ValidationError("unknown routing mode '" + name + "' (relative|absolute)");
}

std::string to_string(RoutingMode m) { return m == RoutingMode::Relative ? "relative" : "absolute"; }

void RoutingConfig::validate() const {
  if (!(tau1 >= 0.0 && tau1 < tau2)) {
    throw ValidationError("need 0 <= tau1 < tau2");
  }
}

std::string to_string(Decision d) {
  switch (d) {
  case Decision::Full:
    return "full";
  case Decision::Continue:
    return "continue";
  case Decision::Reuse:
    return "reuse";
  }
  return "?";
}

namespace {

Decision parse_decision(const std::string &s) {
  if (s == "full") {
    return Decision::Full;
  }
  if (s == "continue") {
    return Decision::Continue;
  }
  if (s == "reuse") {
    return Decision::Reuse;
  }
  throw FormatError("trace: unknown decision '" + s + "'");
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Frame perturbed(const Frame &f, const Image<float>::Array &delta) {
  return Frame(f.height(), f.width(), (f.values() + delta.cast<double>()).max(0.0).min(1.0));
}

// Clip to the budget and to the range keeping f + delta in [0, 1], then
// round to single precision.
Image<float>::Array project(const Frame &f, const Eigen::ArrayXd &delta, double budget) {
  const Eigen::ArrayXd lo = (-f.values()).max(-budget);
  const Eigen::ArrayXd hi = (1.0 - f.values()).min(budget);
  return delta.max(lo).min(hi).cast<float>();
}

} // namespace

DecisionCounts ProtectionTrace::counts() const {
  DecisionCounts c;
  for (const auto &r : records) {
    switch (r.decision) {
    case Decision::Full:
      ++c.full;
      break;
    case Decision::Continue:
      ++c.cont;
      break;
    case Decision::Reuse:
      ++c.reuse;
      break;
    }
  }
  return c;
}

double ProtectionTrace::total_wall_time() const {
  double s = 0.0;
  for (const auto &r : records) {
    s += r.wall_time_seconds;
  }
  return s;
}

std::int64_t ProtectionTrace::total_work() const {
  std::int64_t s = 0;
  for (const auto &r : records) {
    s += r.work_units;
  }
  return s;
}

void ProtectionTrace::append(const ProtectionTrace &other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
}

std::string trace_to_json(const ProtectionTrace &t) {
  nlohmann::json j;
  j["mode"] = t.mode;
  j["routing"] = {{"tau1", t.routing.tau1},
                  {"tau2", t.routing.tau2},
                  {"mode", to_string(t.routing.mode)}};
  j["pgd"] = {{"budget", t.pgd.budget},
              {"steps_full", t.pgd.steps_full},
              {"steps_continue", t.pgd.steps_continue},
              {"step_size", t.pgd.effective_step()},
              {"patience", t.pgd.patience},
              {"rng_seed", t.pgd.rng_seed},
              {"naive_noise", t.pgd.naive_noise},
              {"naive_noise_cell", t.pgd.naive_noise_cell}};
  j["naive_work_per_frame"] = t.naive_work_per_frame();
  j["records"] = nlohmann::json::array();
  for (const auto &r : t.records) {
    j["records"].push_back({{"frame_index", r.frame_index},
                            {"decision", to_string(r.decision)},
                            {"d", std::isfinite(r.d) ? nlohmann::json(r.d) : nlohmann::json("inf")},
                            {"final_distance", r.final_distance},
                            {"wall_time_seconds", r.wall_time_seconds},
                            {"work_units", r.work_units}});
  }
  return j.dump(2) + "\n";
}

ProtectionTrace trace_from_json(const std::string &text) {
  ProtectionTrace t;
  try {
    const auto j = nlohmann::json::parse(text);
    t.mode = j.value("mode", std::string("framework"));
    const auto &r = j.at("routing");
    t.routing.tau1 = r.at("tau1").get<double>();
    t.routing.tau2 = r.at("tau2").get<double>();
    t.routing.mode = parse_routing_mode(r.at("mode").get<std::string>());
    const auto &p = j.at("pgd");
    t.pgd.budget = p.at("budget").get<float>();
    t.pgd.steps_full = p.at("steps_full").get<int>();
    t.pgd.steps_continue = p.at("steps_continue").get<int>();
    t.pgd.step_size = p.at("step_size").get<double>();
    t.pgd.patience = p.value("patience", 3);
    t.pgd.rng_seed = p.value("rng_seed", std::uint64_t{42});
    t.pgd.naive_noise = p.value("naive_noise", 0.15);
    t.pgd.naive_noise_cell = p.value("naive_noise_cell", Index{8});
    for (const auto &rec : j.at("records")) {
      TraceRecord out;
      out.frame_index = rec.at("frame_index").get<std::size_t>();
      out.decision = parse_decision(rec.at("decision").get<std::string>());
      const auto &d = rec.at("d");
      out.d = d.is_string() ? std::numeric_limits<double>::infinity() : d.get<double>();
      out.final_distance = rec.at("final_distance").get<double>();
      out.wall_time_seconds = rec.at("wall_time_seconds").get<double>();
      out.work_units = rec.at("work_units").get<std::int64_t>();
      t.records.push_back(out);
    }
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("trace: ") + e.what());
  }
  return t;
}

// ---------------------------------------------------------------------------

PgdResult pgd_optimize(const Frame &frame, const Embedding &target, const FeatureExtractor &e,
                       const PGDConfig &cfg, const std::optional<PerturbationTensor> &init,
                       int steps) {
  cfg.validate();
  if (steps < 0) {
    throw ValidationError("steps must be non-negative");
  }
  if (target.extractor_id != e.id() || target.dim() != e.dim()) {
    throw MismatchError("target embedding does not belong to extractor '" + e.id() + "'");
  }
  const double budget = cfg.budget;
  Image<float>::Array delta;
  if (init) {
    require_same_shape(frame, init->deltas, "pgd_optimize init");
    validate_perturbation(*init);
    delta = project(frame, init->deltas.values().cast<double>(), budget);
  } else {
    delta = Image<float>::Array::Zero(frame.size());
  }

  double step = cfg.effective_step();
  PgdResult result;
  Image<float>::Array best = delta;
  double best_d = std::numeric_limits<double>::infinity();
  Image<double>::Array best_grad;
  int stall = 0;

  for (int k = 0; k < steps; ++k) {
    auto [d, grad] = e.distance_and_grad(perturbed(frame, delta), target);
    result.work_units += 2;
    if (!std::isfinite(d) || !grad.values().allFinite()) {
      throw NumericalError("non-finite distance or gradient", k);
    }
    if (k == 0) {
      result.initial_distance = d;
    }
    if (d < best_d) {
      best_d = d;
      best = delta;
      best_grad = grad.values();
      stall = 0;
    } else if (++stall >= cfg.patience && cfg.patience > 0) {
      step *= 0.5;
      delta = best;
      grad.values() = best_grad;
      stall = 0;
    }
    if (best_d == 0.0) {
      break;
    }
    delta = project(frame, delta.cast<double>() - step * grad.values().sign(), budget);
  }

  const double last = distance(e.encode(perturbed(frame, delta)), target);
  result.work_units += 1;
  if (!std::isfinite(last)) {
    throw NumericalError("non-finite distance", steps);
  }
  if (steps == 0) {
    result.initial_distance = last;
  }
  if (last < best_d) {
    best_d = last;
    best = delta;
  }
  result.final_distance = best_d;
  result.delta = {Image<float>(frame.height(), frame.width(), best), cfg.budget};
  return result;
}

PgdResult pgd_optimize(const Frame &frame, const Frame &target, const FeatureExtractor &e,
                       const PGDConfig &cfg, const std::optional<PerturbationTensor> &init,
                       int steps) {
  require_same_shape(frame, target, "pgd_optimize");
  PgdResult r = pgd_optimize(frame, e.encode(target), e, cfg, init, steps);
  r.work_units += 1;
  return r;
}

double route_value(double cur, double prev, RoutingMode mode) {
  const double diff = std::abs(cur - prev);
  if (mode == RoutingMode::Absolute) {
    return diff;
  }
  if (prev == 0.0) {
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return diff / prev;
}

double route_distance(const Frame &prev_frame, const Frame &cur_frame,
                      const PerturbationTensor &prev_delta, const Embedding &target,
                      const FeatureExtractor &e, RoutingMode mode) {
  require_same_shape(prev_frame, cur_frame, "route_distance");
  require_same_shape(prev_frame, prev_delta.deltas, "route_distance");
  const double cur = distance(e.encode(apply_perturbation(cur_frame, prev_delta)), target);
  const double prev = distance(e.encode(apply_perturbation(prev_frame, prev_delta)), target);
  return route_value(cur, prev, mode);
}

SceneProtection protect_scene(std::span<const Frame> scene_frames, const Frame &target,
                              const FeatureExtractor &e, const PGDConfig &pgd,
                              const RoutingConfig &routing, std::size_t first_index) {
  pgd.validate();
  routing.validate();
  if (scene_frames.empty()) {
    throw ValidationError("protect_scene: empty scene");
  }
  for (const auto &f : scene_frames) {
    require_same_shape(f, target, "protect_scene");
  }

  SceneProtection out;
  out.trace.routing = routing;
  out.trace.pgd = pgd;
  out.deltas.reserve(scene_frames.size());

  auto start = Clock::now();
  const Embedding target_emb = e.encode(target);
  PgdResult first = pgd_optimize(scene_frames[0], target_emb, e, pgd, std::nullopt, pgd.steps_full);
  out.deltas.push_back(std::move(first.delta));
  out.trace.records.push_back(
      {first_index, Decision::Full, 0.0, first.final_distance, seconds_since(start), first.work_units + 1});
  double prev_distance = first.final_distance;

  for (std::size_t i = 1; i < scene_frames.size(); ++i) {
    start = Clock::now();
    const PerturbationTensor &prev_delta = out.deltas.back();
    const double cur = distance(e.encode(apply_perturbation(scene_frames[i], prev_delta)), target_emb);
    const double d = route_value(cur, prev_distance, routing.mode);
    TraceRecord rec{first_index + i, Decision::Reuse, d, cur, 0.0, 1};
    if (d <= routing.tau1) {
      out.deltas.push_back(prev_delta);
    } else {
      const bool resume = d <= routing.tau2;
      rec.decision = resume ? Decision::Continue : Decision::Full;
      PgdResult r = resume ? pgd_optimize(scene_frames[i], target_emb, e, pgd, prev_delta,
                                          pgd.steps_continue)
                           : pgd_optimize(scene_frames[i], target_emb, e, pgd, std::nullopt,
                                          pgd.steps_full);
      rec.final_distance = r.final_distance;
      rec.work_units += r.work_units;
      out.deltas.push_back(std::move(r.delta));
    }
    rec.wall_time_seconds = seconds_since(start);
    prev_distance = rec.final_distance;
    out.trace.records.push_back(rec);
  }
  return out;
}

VideoProtection protect_video(const FrameSequence &seq, const SceneManifest &manifest,
                              const FeatureExtractor &e, const VideoProtectionConfig &cfg) {
  validate_sequence(seq);
  validate_manifest(manifest);
  if (manifest.total_frames != seq.size()) {
    throw ValidationError("manifest covers " + std::to_string(manifest.total_frames) +
                          " frames, sequence has " + std::to_string(seq.size()));
  }
  cfg.pgd.validate();
  cfg.routing.validate();
  cfg.target.validate();

  const std::size_t n_scenes = manifest.scenes.size();
  std::vector<Frame> targets(n_scenes);
  std::vector<SceneProtection> results(n_scenes);
  parallel_for(n_scenes, cfg.threads, [&](std::size_t s) {
    const auto &scene = manifest.scenes[s];
    std::span<const Frame> frames(seq.frames.data() + scene.start, scene.length());
    targets[s] = make_target(frames, cfg.target, &e);
    results[s] = protect_scene(frames, targets[s], e, cfg.pgd, cfg.routing, scene.start);
  });

  VideoProtection out;
  out.output.fps = seq.fps;
  out.output.source_id = seq.source_id;
  out.manifest = manifest;
  out.trace.routing = cfg.routing;
  out.trace.pgd = cfg.pgd;
  for (std::size_t s = 0; s < n_scenes; ++s) {
    const auto &scene = manifest.scenes[s];
    for (std::size_t k = 0; k < scene.length(); ++k) {
      out.output.frames.push_back(
          apply_perturbation(seq.frames[scene.start + k], results[s].deltas[k]));
      out.deltas.push_back(std::move(results[s].deltas[k]));
    }
    out.trace.append(results[s].trace);
  }
  out.targets = std::move(targets);
  return out;
}

Frame naive_target(const Frame &frame, std::size_t index, const PGDConfig &pgd,
                   std::uint64_t seed_stride, const TargetSpec &style) {
  SplitMix64 rng(pgd.rng_seed + index * seed_stride);
  const Index cell = pgd.naive_noise_cell;
  const Index gh = (frame.height() + cell - 1) / cell;
  const Index gw = (frame.width() + cell - 1) / cell;
  Eigen::ArrayXd grid(gh * gw * kChannels);
  for (Index j = 0; j < grid.size(); ++j) {
    grid[j] = rng.symmetric(pgd.naive_noise);
  }
  Frame noisy(frame.height(), frame.width());
  for (Index y = 0; y < frame.height(); ++y) {
    for (Index x = 0; x < frame.width(); ++x) {
      for (Index c = 0; c < kChannels; ++c) {
        noisy(y, x, c) =
            std::clamp(frame(y, x, c) + grid[((y / cell) * gw + x / cell) * kChannels + c], 0.0, 1.0);
      }
    }
  }
  return blend_target(noisy, style);
}

VideoProtection protect_video_naive(const FrameSequence &seq, const FeatureExtractor &e,
                                    const PGDConfig &pgd, std::uint64_t seed_stride,
                                    const TargetSpec &style, unsigned threads) {
  validate_sequence(seq);
  pgd.validate();
  style.validate();
  const std::size_t n = seq.size();
  std::vector<PgdResult> results(n);
  std::vector<double> seconds(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto start = Clock::now();
    const Frame target = naive_target(seq.frames[i], i, pgd, seed_stride, style);
    results[i] = pgd_optimize(seq.frames[i], target, e, pgd, std::nullopt, pgd.steps_full);
    seconds[i] = seconds_since(start);
  });

  VideoProtection out;
  out.output.fps = seq.fps;
  out.output.source_id = seq.source_id;
  out.manifest = whole_sequence_manifest(n);
  out.trace.mode = "naive";
  out.trace.pgd = pgd;
  for (std::size_t i = 0; i < n; ++i) {
    out.output.frames.push_back(apply_perturbation(seq.frames[i], results[i].delta));
    out.trace.records.push_back(
        {i, Decision::Full, 0.0, results[i].final_distance, seconds[i], results[i].work_units});
    out.deltas.push_back(std::move(results[i].delta));
  }
  return out;
}

void write_protection(const VideoProtection &p, const fs::path &out_dir,
                      const fs::path &trace_path) {
  save_sequence(p.output, out_dir);
  const fs::path delta_dir = out_dir / "deltas";
  fs::create_directories(delta_dir);
  for (std::size_t i = 0; i < p.deltas.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "delta_%06zu.fvdt", i);
    write_delta(p.deltas[i], delta_dir / name);
  }
  SceneManifest m = p.manifest;
  if (!p.targets.empty()) {
    const fs::path target_dir = out_dir / "targets";
    fs::create_directories(target_dir);
    for (std::size_t s = 0; s < p.targets.size(); ++s) {
      char name[32];
      std::snprintf(name, sizeof(name), "scene_%03zu.png", s);
      write_png(p.targets[s], target_dir / name);
      m.scenes[s].target_file = (fs::path("targets") / name).string();
    }
  }
  write_manifest(m, out_dir / "manifest.json");
  if (!trace_path.empty()) {
    write_text_file(trace_path, trace_to_json(p.trace));
  }
}

} // namespace scenecloak
