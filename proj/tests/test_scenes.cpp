#include <doctest.h>

#include <algorithm>

#include "support.hpp"

using namespace scenecloak;

TEST_SUITE("scenes") {

TEST_CASE("mean pixel difference examples") {
  const Frame a = testing::random_frame(8, 8, 1);
  CHECK(mean_pixel_diff(a, a) == 0.0);
  CHECK(mean_pixel_diff(Frame::constant(8, 8, 0.0), Frame::constant(8, 8, 1.0)) == 1.0);

  // 2x2x3 tensors sidestep the 8x8 frame minimum; the op is shape-generic.
  Frame x(2, 2);
  Frame y(2, 2);
  y(1, 0, 2) = 0.6;
  CHECK(mean_pixel_diff(x, y) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(mean_pixel_diff(y, x) == mean_pixel_diff(x, y));
  CHECK_THROWS_AS(mean_pixel_diff(Frame(8, 8), Frame(8, 9)), ShapeError);
}

TEST_CASE("identical frames form one scene") {
  const auto m = partition(testing::repeat(testing::random_frame(16, 16, 2), 20), {});
  REQUIRE(m.scenes.size() == 1);
  CHECK(m.scenes[0].start == 0);
  CHECK(m.scenes[0].end == 20);
  CHECK(m.total_frames == 20);
  CHECK(m.scenes[0].epsilon_scene == 0.04);
}

TEST_CASE("two image blocks split at the change") {
  const Frame a = Frame::constant(16, 16, 0.2);
  const Frame b = Frame::constant(16, 16, 0.5);
  REQUIRE(mean_pixel_diff(a, b) == doctest::Approx(0.3));
  FrameSequence s;
  s.frames.assign(10, a);
  s.frames.insert(s.frames.end(), 10, b);
  const auto m = partition(s, {0.04, 1});
  REQUIRE(m.scenes.size() == 2);
  CHECK(m.scenes[0].end == 10);
  CHECK(m.scenes[1].start == 10);
  CHECK(scene_boundaries(m) == std::vector<std::size_t>{10});
}

TEST_CASE("a difference exactly at the threshold opens a scene") {
  FrameSequence s;
  s.frames = {Frame::constant(8, 8, 0.25), Frame::constant(8, 8, 0.5)};
  CHECK(partition(s, {0.25}).scenes.size() == 2);
  CHECK(partition(s, {0.2500001}).scenes.size() == 1);
}

TEST_CASE("slow pan stays one scene") {
  SynthParams p;
  p.kind = SynthKind::Pan;
  p.step_diff = 0.01;
  const auto m = partition(synth_corpus(p).sequence, {0.04});
  CHECK(m.scenes.size() == 1);
}

TEST_CASE("partition ignores metadata") {
  SynthParams p;
  p.kind = SynthKind::JumpCut;
  auto s = synth_corpus(p).sequence;
  const auto m1 = partition(s, {});
  s.fps = 7.0;
  s.source_id = "other";
  const auto m2 = partition(s, {});
  CHECK(manifest_to_json(m1) == manifest_to_json(m2));
}

TEST_CASE("config validation and short-scene reporting") {
  CHECK_THROWS_AS(partition(testing::repeat(Frame(8, 8), 2), {0.0}), ValidationError);
  CHECK_THROWS_AS(partition(testing::repeat(Frame(8, 8), 2), {0.04, 0}), ValidationError);
  CHECK_THROWS_AS(partition(FrameSequence{}, {}), ValidationError);

  FrameSequence s;
  s.frames = {Frame::constant(8, 8, 0.0), Frame::constant(8, 8, 1.0), Frame::constant(8, 8, 1.0)};
  const auto m = partition(s, {0.04, 2});
  REQUIRE(m.scenes.size() == 2);
  CHECK(short_scene_count(m, {0.04, 2}) == 1);
}

} // TEST_SUITE
