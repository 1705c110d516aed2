#pragma once

#include <Eigen/Core>

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>

#include "scenecloak/image.hpp"

namespace scenecloak {

struct Embedding {
  Eigen::VectorXd values;
  std::string extractor_id;

  Index dim() const { return values.size(); }
};

/// Euclidean distance. Throws MismatchError across extractors or dimensions.
double distance(const Embedding &a, const Embedding &b);

/// distance / sqrt(D), comparable across extractors of different width.
double normalized_distance(const Embedding &a, const Embedding &b);

struct DistanceAndGradient {
  double distance = 0.0;
  Image<double> gradient;
};

/// Feature extractor: maps a frame to a fixed-length embedding and exposes
/// the pixel gradient of the embedding's L2 distance to a target.
class FeatureExtractor {
public:
  virtual ~FeatureExtractor() = default;

  virtual std::string id() const = 0;
  virtual Index dim() const = 0;
  virtual Embedding encode(const Frame &frame) const = 0;

  /// d/dx ||encode(x) - target||, zero where encode(x) == target.
  virtual Image<double> grad_distance(const Frame &frame, const Embedding &target) const;

  /// One forward and one backward pass.
  virtual DistanceAndGradient distance_and_grad(const Frame &frame,
                                                const Embedding &target) const = 0;
};

/// Checks extractor id and dimension before delegating.
Image<double> grad_distance(const Frame &frame, const Embedding &target,
                            const FeatureExtractor &e);

struct SurrogateEncoderConfig {
  std::uint64_t seed = 42;
  Index pool_factor = 4;
  Index dim = 256;
};

/*
 * Deterministic differentiable stand-in for an image encoder:
 *
 *   pool(x)  -- average over pool_factor x pool_factor blocks, per channel
 *   z = W * pool(x) + b
 *   e = tanh(z)
 *
 * W (dim x P) and b are drawn from SplitMix64(seed): W uniform with variance
 * 1/P, b uniform in [-0.5, 0.5]. Draw order is W row-major then b, each
 * value u = (next() >> 11) * 2^-53 mapped to (2u - 1) * scale. The pooled
 * vector is ordered (py, px, c) like frame values.
 *
 * The projection is sized for one frame shape, fixed at construction.
 */
class SurrogateEncoder final : public FeatureExtractor {
public:
  SurrogateEncoder(const SurrogateEncoderConfig &cfg, Index height, Index width);

  std::string id() const override;
  Index dim() const override { return cfg_.dim; }
  Embedding encode(const Frame &frame) const override;
  DistanceAndGradient distance_and_grad(const Frame &frame,
                                        const Embedding &target) const override;

  const SurrogateEncoderConfig &config() const { return cfg_; }
  const Eigen::MatrixXd &projection() const { return weights_; }
  const Eigen::VectorXd &bias() const { return bias_; }

  Eigen::VectorXd pool(const Frame &frame) const;

private:
  void check_shape(const Frame &frame) const;

  SurrogateEncoderConfig cfg_;
  Index height_;
  Index width_;
  Eigen::MatrixXd weights_;
  Eigen::VectorXd bias_;
};

/// Flattening extractor, encode(x) = x. Closed-form PGD oracle.
class IdentityEncoder final : public FeatureExtractor {
public:
  IdentityEncoder(Index height, Index width) : height_(height), width_(width) {}

  std::string id() const override { return "identity"; }
  Index dim() const override { return height_ * width_ * kChannels; }
  Embedding encode(const Frame &frame) const override;
  DistanceAndGradient distance_and_grad(const Frame &frame,
                                        const Embedding &target) const override;

private:
  Index height_;
  Index width_;
};

class Subprocess;

/*
 * Encoder hosted by a child process speaking a length-prefixed protocol on
 * its stdin/stdout. Every message is
 *
 *   u32 LE length (opcode + payload bytes) | u8 opcode | payload
 *
 * with opcodes 0 HELLO, 1 ENCODE, 2 GRAD, 3 ERROR.
 *
 *   HELLO  request: empty.          reply: u16 LE n | n bytes UTF-8 id | u32 LE D
 *   ENCODE request: u32 H | u32 W | H*W*3 f32.           reply: D f32
 *   GRAD   request: u32 H | u32 W | H*W*3 f32 | D f32.   reply: H*W*3 f32
 *   ERROR  reply:   u16 LE n | n bytes UTF-8 message
 *
 * GRAD replies carry the gradient of ||encode(x) - target||.
 * One request is in flight at a time; calls are serialized internally.
 */
class ExternalEncoder final : public FeatureExtractor {
public:
  explicit ExternalEncoder(const std::string &command,
                           std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~ExternalEncoder() override;

  std::string id() const override { return id_; }
  Index dim() const override { return dim_; }
  Embedding encode(const Frame &frame) const override;
  Image<double> grad_distance(const Frame &frame, const Embedding &target) const override;
  DistanceAndGradient distance_and_grad(const Frame &frame,
                                        const Embedding &target) const override;

private:
  std::vector<std::uint8_t> request(std::uint8_t opcode,
                                    const std::vector<std::uint8_t> &payload) const;

  std::unique_ptr<Subprocess> proc_;
  std::chrono::milliseconds timeout_;
  std::string id_;
  Index dim_ = 0;
  mutable std::mutex mutex_;
};

std::unique_ptr<FeatureExtractor> external_encoder(const std::string &command,
                                                   std::chrono::milliseconds timeout =
                                                       std::chrono::seconds(30));

/// Parses `builtin:SEED`, `builtin`, `identity` or `ext:CMD`. Builtin
/// extractors are sized for height x width frames.
std::unique_ptr<FeatureExtractor> make_encoder(const std::string &spec, Index height,
                                               Index width,
                                               const SurrogateEncoderConfig &defaults = {});

} // namespace scenecloak
