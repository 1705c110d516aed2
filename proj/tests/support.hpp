#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "scenecloak/scenecloak.hpp"

namespace testing {

using namespace scenecloak;

inline Frame random_frame(Index h, Index w, std::uint32_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Frame f(h, w);
  for (Index i = 0; i < f.size(); ++i) {
    f.values()[i] = u(gen);
  }
  return f;
}

inline Eigen::VectorXd random_vector(Index n, std::uint32_t seed, double scale = 1.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) {
    v[i] = u(gen);
  }
  return v;
}

inline FrameSequence repeat(const Frame &f, std::size_t n) {
  FrameSequence s;
  s.frames.assign(n, f);
  return s;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string &tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("scenecloak_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

} // namespace testing

namespace testing {

// Central finite differences of distance(encode(f), target) over every
// coordinate.
inline Image<double> fd_gradient(const FeatureExtractor &e, const Frame &f, const Embedding &target,
                                 double h) {
  Image<double> g(f.height(), f.width());
  Frame probe = f;
  for (Index i = 0; i < f.size(); ++i) {
    const double v = f.values()[i];
    probe.values()[i] = v + h;
    const double up = distance(e.encode(probe), target);
    probe.values()[i] = v - h;
    const double down = distance(e.encode(probe), target);
    probe.values()[i] = v;
    g.values()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double relative_error(const Image<double> &got, const Image<double> &want) {
  const double denom = std::max(want.values().matrix().norm(), 1e-300);
  return (got.values() - want.values()).matrix().norm() / denom;
}

} // namespace testing
