#include "scenecloak/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scenecloak/scenecloak.hpp"

namespace scenecloak {

namespace {

using nlohmann::json;

// --config FILE: a JSON object whose keys are long flag names. Keys apply to
// the global options or to the selected subcommand; nested objects name a
// subcommand explicitly. Flags given on the command line win.
class JsonConfig final : public CLI::Config {
public:
  explicit JsonConfig(const CLI::App *root) : root_(root) {}

  std::string to_config(const CLI::App *, bool, bool, std::string) const override {
    return "{}\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream &input) const override {
    json j;
    try {
      j = json::parse(input);
    } catch (const json::exception &e) {
      throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) {
      throw CLI::ConversionError("config: top level must be a JSON object");
    }
    std::vector<std::string> path;
    for (const CLI::App *app = root_;;) {
      const auto subs = app->get_subcommands();
      if (subs.empty()) {
        break;
      }
      app = subs.front();
      path.push_back(app->get_name());
    }
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, path, items);
    return items;
  }

private:
  void collect(const json &obj, const std::vector<std::string> &parents,
               const std::vector<std::string> &selected,
               std::vector<CLI::ConfigItem> &items) const {
    for (const auto &[key, value] : obj.items()) {
      std::string name = key;
      std::replace(name.begin(), name.end(), '_', '-');
      if (value.is_object()) {
        auto p = parents;
        p.push_back(name);
        collect(value, p, selected, items);
        continue;
      }
      CLI::ConfigItem item;
      item.name = name;
      if (!parents.empty()) {
        item.parents = parents;
      } else if (root_->get_option_no_throw("--" + name) == nullptr) {
        item.parents = selected;
      }
      if (value.is_array()) {
        for (const auto &v : value) {
          item.inputs.push_back(scalar(v));
        }
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }

  static std::string scalar(const json &v) {
    if (v.is_string()) {
      return v.get<std::string>();
    }
    if (v.is_boolean()) {
      return v.get<bool>() ? "true" : "false";
    }
    return v.dump();
  }

  const CLI::App *root_;
};

struct Globals {
  std::uint64_t seed = 42;
  unsigned threads = 1;
  std::string encoder = "builtin";
  Index encoder_pool = 4;
  Index encoder_dim = 256;
  bool center_crop = false;
};

struct ProtectOpts {
  std::string mode = "framework";
  float budget = 0.07f;
  double tau1 = 0.06;
  double tau2 = 0.45;
  std::string routing = "relative";
  int steps_full = 100;
  std::optional<int> steps_continue;
  double step_size = 0.0;
  int patience = 3;
  double naive_noise = 0.15;
  Index naive_cell = 8;
  std::uint64_t seed_stride = 1;
  std::string base = "average";
  std::string style;
  double lambda = 0.5;
};

void add_protect_options(CLI::App *app, ProtectOpts &o) {
  app->add_option("--p", o.budget, "l-inf perturbation budget")->capture_default_str();
  app->add_option("--tau1", o.tau1, "reuse threshold on d_i")->capture_default_str();
  app->add_option("--tau2", o.tau2, "recompute threshold on d_i")->capture_default_str();
  app->add_option("--routing", o.routing, "d_i form")
      ->check(CLI::IsMember({"relative", "absolute"}))
      ->capture_default_str();
  app->add_option("--steps-full", o.steps_full, "PGD steps from zero")->capture_default_str();
  app->add_option("--steps-continue", o.steps_continue,
                  "PGD steps from the previous delta (default: min(25, steps-full))");
  app->add_option("--step-size", o.step_size, "sign-gradient step, 0 = p/10")
      ->capture_default_str();
  app->add_option("--patience", o.patience, "stalled steps before halving, 0 = never")
      ->capture_default_str();
  app->add_option("--naive-noise", o.naive_noise, "naive target noise amplitude")
      ->capture_default_str();
  app->add_option("--naive-noise-cell", o.naive_cell, "naive target noise cell in pixels")
      ->capture_default_str();
  app->add_option("--seed-stride", o.seed_stride, "naive per-frame seed stride")
      ->capture_default_str();
  app->add_option("--target-base", o.base, "scene target base image")
      ->check(CLI::IsMember({"average", "middle", "medoid"}))
      ->capture_default_str();
  app->add_option("--style", o.style,
                  "style PNG, 'checkerboard' or 'none' (default: checkerboard for framework, "
                  "none for naive)");
  app->add_option("--lambda", o.lambda, "style blend weight")->capture_default_str();
}

PGDConfig pgd_config(const ProtectOpts &o, const Globals &g) {
  PGDConfig c;
  c.budget = o.budget;
  c.steps_full = o.steps_full;
  c.steps_continue = o.steps_continue.value_or(std::min(25, o.steps_full));
  c.step_size = o.step_size;
  c.patience = o.patience;
  c.rng_seed = g.seed;
  c.naive_noise = o.naive_noise;
  c.naive_noise_cell = o.naive_cell;
  c.validate();
  return c;
}

RoutingConfig routing_config(const ProtectOpts &o) {
  RoutingConfig r{o.tau1, o.tau2, parse_routing_mode(o.routing)};
  r.validate();
  return r;
}

TargetSpec target_spec(const ProtectOpts &o, bool naive, Index h, Index w) {
  TargetSpec t;
  t.base_method = parse_base_method(o.base);
  t.blend_lambda = o.lambda;
  const std::string style = o.style.empty() ? (naive ? "none" : "checkerboard") : o.style;
  if (style == "checkerboard") {
    t.style_image = checkerboard(h, w);
  } else if (style != "none") {
    t.style_image = read_png(style);
  }
  t.validate();
  if (t.style_image) {
    require_same_shape(*t.style_image, Frame(h, w), "style image");
  }
  return t;
}

std::unique_ptr<FeatureExtractor> encoder_for(const Globals &g, const FrameSequence &seq) {
  SurrogateEncoderConfig d;
  d.seed = g.seed;
  d.pool_factor = g.encoder_pool;
  d.dim = g.encoder_dim;
  const Frame &f = seq.frames.front();
  return make_encoder(g.encoder, f.height(), f.width(), d);
}

FrameSequence load_nonempty(const std::string &dir, const Globals &g) {
  FrameSequence seq = load_sequence(dir);
  if (seq.frames.empty()) {
    throw ValidationError("no frame_NNNNNN.png files in " + dir);
  }
  if (g.center_crop) {
    for (auto &f : seq.frames) {
      f = center_crop_square(f);
    }
  }
  return seq;
}

SceneManifest manifest_for(const std::string &path, const FrameSequence &seq) {
  if (path.empty()) {
    return partition(seq, {});
  }
  SceneManifest m = read_manifest(path);
  if (m.total_frames != seq.size()) {
    throw ValidationError("manifest covers " + std::to_string(m.total_frames) +
                          " frames, sequence has " + std::to_string(seq.size()));
  }
  return m;
}

std::optional<double> parse_epsilon_p(const std::string &s) {
  if (s == "auto") {
    return std::nullopt;
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != s.size() || !(v > 0.0)) {
    throw ValidationError("--epsilon-p must be 'auto' or a positive number");
  }
  return v;
}

void emit(const std::string &text, const std::string &path, std::ostream &out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

json nan_as_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::map<std::string, std::vector<Frame>> load_genres(const fs::path &root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw IoError("genre directory not found: " + root.string());
  }
  std::map<std::string, std::vector<Frame>> out;
  for (const auto &entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) {
      out[entry.path().filename().string()] = load_sequence(entry.path()).frames;
    }
  }
  return out;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Scene-consistent video protection against style mimicry", "scenecloak"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.set_config("--config", "", "JSON file of flag values");

  Globals g;
  app.add_option("--seed", g.seed, "seed for every random draw")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (scene level)")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  app.add_option("--encoder", g.encoder, "builtin[:SEED] | identity | ext:\"CMD\"")
      ->capture_default_str();
  app.add_option("--encoder-pool", g.encoder_pool, "builtin encoder pooling factor")
      ->capture_default_str();
  app.add_option("--encoder-dim", g.encoder_dim, "builtin encoder embedding size")
      ->capture_default_str();
  app.add_flag("--center-crop", g.center_crop, "crop input frames to their centered square");

  // synth
  auto *synth = app.add_subcommand("synth", "write a synthetic frame sequence");
  std::string synth_kind;
  std::string synth_out;
  SynthParams sp;
  synth->add_option("kind", synth_kind, "static | pan | jumpcut | noise-motion")
      ->required()
      ->check(CLI::IsMember({"static", "pan", "jumpcut", "noise-motion"}));
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--len", sp.length, "frames")->capture_default_str();
  synth->add_option("--width", sp.width)->capture_default_str();
  synth->add_option("--height", sp.height)->capture_default_str();
  synth->add_option("--scenes", sp.scenes, "jumpcut scene count")->capture_default_str();
  synth->add_option("--step-diff", sp.step_diff, "pan per-step mean diff bound")
      ->capture_default_str();
  synth->add_option("--block", sp.block, "noise-motion block edge")->capture_default_str();
  synth->add_option("--speed", sp.speed, "noise-motion pixels per frame")->capture_default_str();

  // partition
  auto *part = app.add_subcommand("partition", "split a sequence into scenes");
  std::string part_in;
  std::string part_out;
  ScenePartitionConfig pcfg;
  part->add_option("--in", part_in, "frame directory")->required();
  part->add_option("--epsilon-scene", pcfg.epsilon_scene, "scene cut threshold")
      ->capture_default_str();
  part->add_option("--min-scene-len", pcfg.min_scene_len, "warn about shorter scenes")
      ->capture_default_str();
  part->add_option("--out", part_out, "manifest path (default stdout)");

  // protect
  auto *prot = app.add_subcommand("protect", "protect a frame sequence");
  std::string prot_in;
  std::string prot_manifest;
  std::string prot_out;
  std::string prot_trace;
  ProtectOpts po;
  prot->add_option("--in", prot_in, "frame directory")->required();
  prot->add_option("--manifest", prot_manifest, "scene manifest (default: partition)");
  prot->add_option("--out", prot_out, "output directory")->required();
  prot->add_option("--trace", prot_trace, "trace JSON (default OUT/trace.json)");
  prot->add_option("--mode", po.mode)
      ->check(CLI::IsMember({"framework", "naive"}))
      ->capture_default_str();
  add_protect_options(prot, po);

  // attack
  auto *att = app.add_subcommand("attack", "pixel-averaging perturbation removal");
  att->require_subcommand(0, 1);
  std::string att_in;
  std::string att_manifest;
  std::string att_out;
  std::string att_eps = "auto";
  std::string att_scorer = "sharpness";
  int att_n = 5;
  att->add_option("--in", att_in, "protected frame directory");
  att->add_option("--manifest", att_manifest, "scene manifest (default: partition)");
  att->add_option("--n", att_n, "odd window length >= 3")->capture_default_str();
  att->add_option("--epsilon-p", att_eps, "'auto' or a threshold")->capture_default_str();
  att->add_option("--scorer", att_scorer, "sharpness | ext:\"CMD\"")->capture_default_str();
  att->add_option("--out", att_out, "output directory");

  auto *split = att->add_subcommand("scene-split", "forced mid-scene split attack");
  std::string split_in;
  std::string split_manifest;
  std::string split_report;
  std::string split_eps = "auto";
  std::size_t split_scene = 0;
  std::size_t split_at = 0;
  std::size_t split_len = 0;
  ProtectOpts spo;
  split->add_option("--in", split_in, "original frame directory")->required();
  split->add_option("--manifest", split_manifest, "scene manifest (default: partition)");
  split->add_option("--scene", split_scene, "scene index")->capture_default_str();
  split->add_option("--at", split_at, "frame index opening the second subscene")->required();
  split->add_option("--len", split_len, "frames per subscene, 0 = to the scene edges")
      ->capture_default_str();
  split->add_option("--epsilon-p", split_eps)->capture_default_str();
  split->add_option("--report", split_report, "report JSON (default stdout)");
  add_protect_options(split, spo);

  // evaluate
  auto *eval = app.add_subcommand("evaluate", "compare a candidate sequence to the original");
  std::string ev_orig;
  std::string ev_cand;
  std::string ev_trace;
  std::string ev_bench;
  std::string ev_report;
  std::string ev_genres;
  std::string ev_genre;
  std::string ev_classifier = "histogram";
  double ev_naive_seconds = 0.0;
  eval->add_option("--original", ev_orig)->required();
  eval->add_option("--candidate", ev_cand)->required();
  eval->add_option("--trace", ev_trace, "protection trace for speedup and decisions");
  eval->add_option("--naive-seconds", ev_naive_seconds,
                   "naive seconds per frame; adds wall-clock speedup");
  eval->add_option("--bench", ev_bench, "bench JSON supplying --naive-seconds");
  eval->add_option("--genres", ev_genres, "directory of per-genre exemplar frame folders");
  eval->add_option("--genre", ev_genre, "ground-truth genre of the candidate frames");
  eval->add_option("--classifier", ev_classifier, "histogram | ext:\"CMD\"")
      ->capture_default_str();
  eval->add_option("--report", ev_report, "report JSON (default stdout)");

  // calibrate
  auto *cal = app.add_subcommand("calibrate", "tradeoff tables");
  cal->require_subcommand(1);
  auto *taus = cal->add_subcommand("taus", "grid over (tau1, tau2)");
  std::string ct_in;
  std::string ct_manifest;
  std::string ct_out;
  std::vector<double> ct_t1 = default_tau1_grid();
  std::vector<double> ct_t2 = default_tau2_grid();
  ProtectOpts cpo;
  taus->add_option("--in", ct_in)->required();
  taus->add_option("--manifest", ct_manifest, "scene manifest (default: partition)");
  taus->add_option("--tau1-grid", ct_t1)->delimiter(',')->capture_default_str();
  taus->add_option("--tau2-grid", ct_t2)->delimiter(',')->capture_default_str();
  taus->add_option("--out", ct_out, "CSV path (default stdout)");
  add_protect_options(taus, cpo);

  auto *win = cal->add_subcommand("window", "averaging window sweep over naive protection");
  std::string cw_in;
  std::string cw_manifest;
  std::string cw_out;
  std::string cw_eps = "auto";
  std::vector<int> cw_n{1, 3, 5, 7, 9};
  ProtectOpts wpo;
  win->add_option("--in", cw_in)->required();
  win->add_option("--manifest", cw_manifest, "scene manifest (default: partition)");
  win->add_option("--n-grid", cw_n)->delimiter(',')->capture_default_str();
  win->add_option("--epsilon-p", cw_eps)->capture_default_str();
  win->add_option("--out", cw_out, "CSV path (default stdout)");
  add_protect_options(win, wpo);

  // bench
  auto *bench = app.add_subcommand("bench", "time naive per-frame protection");
  std::string b_in;
  std::string b_out;
  std::size_t b_frames = 3;
  ProtectOpts bpo;
  bench->add_option("--in", b_in)->required();
  bench->add_option("--frames", b_frames, "frames to time")->capture_default_str();
  bench->add_option("--out", b_out, "bench JSON (default stdout)");
  add_protect_options(bench, bpo);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError &e) {
    if (args.empty()) {
      out << app.help();
      return 1;
    }
    const int code = app.exit(e, out, err);
    if (code != 0) {
      err << app.help();
    }
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) {
      sp.kind = parse_synth_kind(synth_kind);
      sp.seed = g.seed;
      const SynthCorpus c = synth_corpus(sp);
      save_sequence(c.sequence, synth_out);
      out << "wrote " << c.sequence.size() << " frames to " << synth_out;
      if (!c.cuts.empty()) {
        out << "; cuts at";
        for (auto i : c.cuts) {
          out << ' ' << i;
        }
      }
      out << '\n';
    } else if (*part) {
      const FrameSequence seq = load_nonempty(part_in, g);
      const SceneManifest m = partition(seq, pcfg);
      emit(manifest_to_json(m), part_out, out);
      if (const auto n = short_scene_count(m, pcfg); n > 0) {
        err << "warning: " << n << " scene(s) shorter than " << pcfg.min_scene_len
            << " frames\n";
      }
    } else if (*prot) {
      const FrameSequence seq = load_nonempty(prot_in, g);
      const auto e = encoder_for(g, seq);
      const bool naive = po.mode == "naive";
      const Frame &f0 = seq.frames.front();
      const TargetSpec spec = target_spec(po, naive, f0.height(), f0.width());
      const PGDConfig pgd = pgd_config(po, g);
      VideoProtection p;
      if (naive) {
        p = protect_video_naive(seq, *e, pgd, po.seed_stride, spec, g.threads);
      } else {
        VideoProtectionConfig cfg{spec, pgd, routing_config(po), g.threads};
        p = protect_video(seq, manifest_for(prot_manifest, seq), *e, cfg);
      }
      const fs::path trace = prot_trace.empty() ? fs::path(prot_out) / "trace.json"
                                                : fs::path(prot_trace);
      write_protection(p, prot_out, trace);
      const auto c = p.trace.counts();
      out << "protected " << seq.size() << " frames (" << c.full << " full, " << c.cont
          << " continue, " << c.reuse << " reuse), speedup " << work_speedup(p.trace) << '\n';
    } else if (*split) {
      const FrameSequence seq = load_nonempty(split_in, g);
      const SceneManifest m = manifest_for(split_manifest, seq);
      if (split_scene >= m.scenes.size()) {
        throw ValidationError("--scene " + std::to_string(split_scene) + " out of range (" +
                              std::to_string(m.scenes.size()) + " scenes)");
      }
      const SceneRange &r = m.scenes[split_scene];
      if (split_at <= r.start || split_at >= r.end) {
        throw ValidationError("--at must lie strictly inside scene " +
                              std::to_string(split_scene));
      }
      const auto e = encoder_for(g, seq);
      const Frame &f0 = seq.frames.front();
      const std::span<const Frame> frames(seq.frames.data() + r.start, r.length());
      const SceneSplitResult res = scene_split_attack(
          frames, {split_at - r.start, split_len}, target_spec(spo, false, f0.height(), f0.width()),
          pgd_config(spo, g), routing_config(spo), *e, parse_epsilon_p(split_eps));
      nlohmann::ordered_json j;
      j["scene"] = split_scene;
      j["split_at"] = split_at;
      j["target_distance"] = res.target_distance;
      j["attacked"] = {{"latent_l2", res.attacked_latent_l2}, {"mpd", res.attacked_mpd}};
      j["unattacked"] = {{"latent_l2", res.unattacked_latent_l2}, {"mpd", res.unattacked_mpd}};
      j["mpd_ratio"] = nan_as_null(res.attacked_mpd / res.unattacked_mpd);
      emit(j.dump(2) + "\n", split_report, out);
    } else if (*att) {
      if (att_in.empty() || att_out.empty()) {
        throw ValidationError("attack needs --in and --out");
      }
      const FrameSequence seq = load_nonempty(att_in, g);
      const SceneManifest m = manifest_for(att_manifest, seq);
      std::unique_ptr<QualityScorer> scorer;
      if (att_scorer == "sharpness") {
        scorer = std::make_unique<SharpnessScorer>();
      } else if (att_scorer.rfind("ext:", 0) == 0) {
        const Frame &f0 = seq.frames.front();
        scorer = std::make_unique<ExternalScorer>(make_encoder(att_scorer, f0.height(), f0.width()));
      } else {
        throw ValidationError("--scorer must be 'sharpness' or ext:CMD");
      }
      const RemovalResult res =
          remove_perturbations(seq, m, {att_n, parse_epsilon_p(att_eps)}, *scorer, g.threads);
      save_sequence(res.recovered, att_out);
      json j;
      j["window"] = att_n;
      j["chosen"] = res.chosen;
      j["epsilon_used"] = json::array();
      for (double v : res.epsilon_used) {
        j["epsilon_used"].push_back(nan_as_null(v));
      }
      write_text_file(fs::path(att_out) / "attack.json", j.dump(2) + "\n");
      out << "recovered " << res.recovered.size() << " frames to " << att_out << '\n';
    } else if (*eval) {
      const FrameSequence orig = load_nonempty(ev_orig, g);
      const FrameSequence cand = load_nonempty(ev_cand, g);
      const auto e = encoder_for(g, orig);
      EvalOptions opts;
      ProtectionTrace trace;
      if (!ev_trace.empty()) {
        trace = trace_from_json(read_text_file(ev_trace));
        opts.trace = &trace;
      }
      if (!ev_bench.empty()) {
        try {
          opts.naive_seconds_per_frame =
              json::parse(read_text_file(ev_bench)).at("naive_seconds_per_frame").get<double>();
        } catch (const json::exception &ex) {
          throw FormatError(std::string("bench: ") + ex.what());
        }
      }
      if (ev_naive_seconds > 0.0) {
        opts.naive_seconds_per_frame = ev_naive_seconds;
      }
      if (opts.naive_seconds_per_frame > 0.0 && opts.trace == nullptr) {
        throw ValidationError("wall-clock speedup needs --trace");
      }
      EvalReport rep = evaluate(orig, cand, *e, opts);
      if (!ev_genres.empty()) {
        if (ev_genre.empty()) {
          throw ValidationError("--genres needs --genre");
        }
        const auto exemplars = load_genres(ev_genres);
        std::unique_ptr<GenreClassifier> cls;
        if (ev_classifier == "histogram") {
          cls = std::make_unique<HistogramGenreClassifier>(exemplars);
        } else if (ev_classifier.rfind("ext:", 0) == 0) {
          std::vector<std::string> names;
          for (const auto &[name, frames] : exemplars) {
            names.push_back(name);
          }
          const Frame &f0 = cand.frames.front();
          cls = std::make_unique<ExternalGenreClassifier>(
              make_encoder(ev_classifier, f0.height(), f0.width()), names);
        } else {
          throw ValidationError("--classifier must be 'histogram' or ext:CMD");
        }
        rep.genre_shift = genre_shift(cand.frames, ev_genre, *cls);
      }
      emit(report_to_json(rep), ev_report, out);
    } else if (*taus) {
      const FrameSequence seq = load_nonempty(ct_in, g);
      const auto e = encoder_for(g, seq);
      const Frame &f0 = seq.frames.front();
      VideoProtectionConfig base{target_spec(cpo, false, f0.height(), f0.width()),
                                 pgd_config(cpo, g), routing_config(cpo), 1};
      const auto rows = grid_search_taus(seq, manifest_for(ct_manifest, seq), *e, ct_t1, ct_t2,
                                         base, g.threads);
      emit(tau_grid_csv(rows), ct_out, out);
    } else if (*win) {
      const FrameSequence seq = load_nonempty(cw_in, g);
      const auto e = encoder_for(g, seq);
      const Frame &f0 = seq.frames.front();
      const auto rows =
          sweep_window(seq, manifest_for(cw_manifest, seq), *e, cw_n, pgd_config(wpo, g),
                       target_spec(wpo, true, f0.height(), f0.width()), parse_epsilon_p(cw_eps),
                       g.threads);
      emit(window_csv(rows), cw_out, out);
    } else if (*bench) {
      const FrameSequence seq = load_nonempty(b_in, g);
      const auto e = encoder_for(g, seq);
      const Frame &f0 = seq.frames.front();
      const PGDConfig pgd = pgd_config(bpo, g);
      const TargetSpec spec = target_spec(bpo, true, f0.height(), f0.width());
      const std::size_t n = std::min(std::max<std::size_t>(b_frames, 1), seq.size());
      std::int64_t work = 0;
      const auto start = std::chrono::steady_clock::now();
      for (std::size_t i = 0; i < n; ++i) {
        const Frame t = naive_target(seq.frames[i], i, pgd, bpo.seed_stride, spec);
        work += pgd_optimize(seq.frames[i], t, *e, pgd, std::nullopt, pgd.steps_full).work_units;
      }
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      nlohmann::ordered_json j;
      j["encoder"] = e->id();
      j["frames_timed"] = n;
      j["naive_seconds_per_frame"] = secs / static_cast<double>(n);
      j["work_units_per_frame"] = static_cast<double>(work) / static_cast<double>(n);
      emit(j.dump(2) + "\n", b_out, out);
    }
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return e.is_validation() ? 1 : 2;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

} // namespace scenecloak
