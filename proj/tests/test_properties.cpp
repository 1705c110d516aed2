#include <doctest.h>

#include <random>
#include <thread>

#include "support.hpp"

using namespace scenecloak;

TEST_SUITE("properties") {

TEST_CASE("surrogate gradients agree with finite differences across configs") {
  const SurrogateEncoderConfig configs[] = {{1, 2, 24}, {42, 4, 48}, {99, 8, 12}};
  std::uint32_t seed = 1000;
  for (const auto &cfg : configs) {
    const SurrogateEncoder enc(cfg, 16, 16);
    for (int k = 0; k < 4; ++k, ++seed) {
      const Frame f = testing::random_frame(16, 16, seed, 0.05, 0.95);
      const Embedding t{testing::random_vector(cfg.dim, seed + 500, 0.95), enc.id()};
      const double err =
          testing::relative_error(grad_distance(f, t, enc), testing::fd_gradient(enc, f, t, 1e-4));
      CHECK(err < 1e-4);
    }
  }
}

TEST_CASE("embedding distance is a metric") {
  const SurrogateEncoder enc({42, 4, 48}, 16, 16);
  std::vector<Embedding> pts;
  for (std::uint32_t i = 0; i < 12; ++i) {
    pts.push_back(enc.encode(testing::random_frame(16, 16, 2000 + i)));
  }
  for (const auto &a : pts) {
    CHECK(distance(a, a) == 0.0);
    for (const auto &b : pts) {
      CHECK(distance(a, b) >= 0.0);
      CHECK(distance(a, b) == distance(b, a));
      for (const auto &c : pts) {
        CHECK(distance(a, b) <= distance(a, c) + distance(c, b) + 1e-12);
      }
    }
  }
}

TEST_CASE("encoding is thread-safe and deterministic") {
  const SurrogateEncoder enc({42, 4, 48}, 16, 16);
  std::vector<Frame> frames;
  for (std::uint32_t i = 0; i < 8; ++i) {
    frames.push_back(testing::random_frame(16, 16, 2100 + i));
  }
  std::vector<Eigen::VectorXd> serial;
  for (const auto &f : frames) {
    serial.push_back(enc.encode(f).values);
  }
  std::vector<Eigen::VectorXd> threaded(frames.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    pool.emplace_back([&, i] { threaded[i] = enc.encode(frames[i]).values; });
  }
  for (auto &t : pool) {
    t.join();
  }
  CHECK(serial == threaded);
}

TEST_CASE("partition invariants and refinement on random step sequences") {
  std::mt19937 gen(77);
  std::uniform_real_distribution<double> jump(0.0, 0.12);
  for (int trial = 0; trial < 10; ++trial) {
    FrameSequence seq;
    double level = 0.5;
    for (int i = 0; i < 30; ++i) {
      level = std::clamp(level + (gen() % 2 ? 1 : -1) * jump(gen), 0.0, 1.0);
      Frame f = testing::random_frame(8, 8, 3000 + trial * 100 + i, 0.0, 0.02);
      f.values() = (f.values() + level).min(1.0);
      seq.frames.push_back(f);
    }
    std::vector<std::vector<std::size_t>> bounds;
    for (double eps : {0.08, 0.04, 0.02}) {
      const auto m = partition(seq, {eps});
      CHECK_NOTHROW(validate_manifest(m));
      for (const auto &sc : m.scenes) {
        for (std::size_t i = sc.start + 1; i < sc.end; ++i) {
          CHECK(mean_pixel_diff(seq.frames[i], seq.frames[i - 1]) < eps);
        }
      }
      for (auto b : scene_boundaries(m)) {
        CHECK(mean_pixel_diff(seq.frames[b], seq.frames[b - 1]) >= eps);
      }
      bounds.push_back(scene_boundaries(m));
    }
    for (std::size_t k = 1; k < bounds.size(); ++k) {
      CHECK(std::includes(bounds[k].begin(), bounds[k].end(), bounds[k - 1].begin(),
                          bounds[k - 1].end()));
    }
  }
}

TEST_CASE("pixel average stays within the included values") {
  for (std::uint32_t trial = 0; trial < 10; ++trial) {
    std::vector<Frame> w;
    for (std::uint32_t k = 0; k < 5; ++k) {
      w.push_back(testing::random_frame(8, 8, 4000 + trial * 10 + k));
    }
    const double eps = 0.05 + 0.05 * trial;
    const Frame avg = pixel_average(w, 2, eps);
    for (Index i = 0; i < avg.size(); ++i) {
      const double c = w[2].values()[i];
      double lo = c;
      double hi = c;
      for (const auto &f : w) {
        if (std::abs(f.values()[i] - c) < eps) {
          lo = std::min(lo, f.values()[i]);
          hi = std::max(hi, f.values()[i]);
        }
      }
      CHECK(avg.values()[i] >= lo - 1e-15);
      CHECK(avg.values()[i] <= hi + 1e-15);
    }
    CHECK(pixel_average(w, 2, 1e-300) == w[2]);
  }
}

TEST_CASE("PGD respects budget and range and never ends worse than it starts") {
  const SurrogateEncoder enc({42, 4, 48}, 16, 16);
  PGDConfig c;
  for (std::uint32_t trial = 0; trial < 6; ++trial) {
    c.budget = 0.02f + 0.03f * static_cast<float>(trial % 3);
    const Frame f = testing::random_frame(16, 16, 5000 + trial);
    const Frame t = testing::random_frame(16, 16, 5100 + trial);
    PerturbationTensor init{Image<float>(16, 16), c.budget};
    std::mt19937 gen(trial);
    std::uniform_real_distribution<float> u(-c.budget, c.budget);
    for (Index i = 0; i < init.deltas.size(); ++i) {
      init.deltas.values()[i] = u(gen);
    }
    const auto r = pgd_optimize(f, t, enc, c, init, 15);
    CHECK(r.delta.linf() <= c.budget + 1e-6f);
    const Frame out = apply_perturbation(f, r.delta);
    CHECK(out.values().minCoeff() >= 0.0);
    CHECK(out.values().maxCoeff() <= 1.0);
    CHECK((f.values() + r.delta.deltas.values().cast<double>()).minCoeff() >= -1e-7);
    CHECK((f.values() + r.delta.deltas.values().cast<double>()).maxCoeff() <= 1.0 + 1e-7);
    CHECK(r.final_distance <= r.initial_distance);
  }
}

TEST_CASE("FVDT round trip is bit-exact for random tensors") {
  std::mt19937 gen(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Index h = 8 + static_cast<Index>(gen() % 9);
    const Index w = 8 + static_cast<Index>(gen() % 9);
    const float budget = 0.01f + 0.24f * static_cast<float>(gen() % 1000) / 1000.0f;
    std::uniform_real_distribution<float> u(-budget, budget);
    PerturbationTensor t{Image<float>(h, w), budget};
    for (Index i = 0; i < t.deltas.size(); ++i) {
      t.deltas.values()[i] = u(gen);
    }
    t.deltas.values()[0] = -0.0f;
    t.deltas.values()[1] = std::numeric_limits<float>::denorm_min();
    const auto back = decode_delta(encode_delta(t));
    REQUIRE(back.deltas.size() == t.deltas.size());
    CHECK(back.budget == t.budget);
    CHECK(std::memcmp(back.deltas.values().data(), t.deltas.values().data(),
                      sizeof(float) * static_cast<std::size_t>(t.deltas.size())) == 0);
  }
}

TEST_CASE("targets lie between base and style") {
  for (std::uint32_t trial = 0; trial < 10; ++trial) {
    const Frame base = testing::random_frame(8, 8, 6000 + trial);
    const Frame style = testing::random_frame(8, 8, 6100 + trial);
    const double lambda = trial / 9.0;
    const Frame t = blend_target(base, {BaseMethod::SceneAverage, style, lambda});
    CHECK(t.values().minCoeff() >= 0.0);
    CHECK(t.values().maxCoeff() <= 1.0);
    CHECK(((t.values() >= base.values().min(style.values()) - 1e-15) &&
           (t.values() <= base.values().max(style.values()) + 1e-15))
              .all());
  }
}

TEST_CASE("MPD is symmetric and bounded by the l-inf change") {
  for (std::uint32_t trial = 0; trial < 10; ++trial) {
    const Frame a = testing::random_frame(8, 8, 7000 + trial, 0.1, 0.9);
    Frame b = a;
    b.values() += testing::random_vector(a.size(), 7100 + trial, 0.07).array();
    CHECK(mpd(a, b) == mpd(b, a));
    CHECK(mpd(a, b) <= 255.0 * (a.values() - b.values()).abs().maxCoeff() + 1e-12);
    CHECK(mpd(a, b) <= 255.0 * 0.07);
  }
}

TEST_CASE("removal preserves count and dimensions on random scenes") {
  for (std::uint32_t trial = 0; trial < 4; ++trial) {
    FrameSequence seq;
    for (std::uint32_t i = 0; i < 9; ++i) {
      seq.frames.push_back(testing::random_frame(8, 8, 8000 + trial * 20 + i));
    }
    const SceneManifest m{{{0, 4 + trial, "", 0.04}, {4 + trial, 9, "", 0.04}}, 9};
    const auto r = remove_perturbations(seq, m, {3 + 2 * static_cast<int>(trial % 3), std::nullopt},
                                        SharpnessScorer{}, 1 + trial);
    REQUIRE(r.recovered.size() == 9);
    for (const auto &f : r.recovered.frames) {
      CHECK(f.same_shape(seq.frames[0]));
    }
  }
}

} // TEST_SUITE
