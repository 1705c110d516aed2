#include "scenecloak/encoder.hpp"

#include <cmath>

#include "scenecloak/rng.hpp"
#include "scenecloak/wire.hpp"
#include "subprocess.hpp"

namespace scenecloak {

double distance(const Embedding &a, const Embedding &b) {
  if (a.extractor_id != b.extractor_id) {
    throw MismatchError("embeddings from different extractors: '" + a.extractor_id + "' vs '" +
                        b.extractor_id + "'");
  }
  if (a.dim() != b.dim()) {
    throw MismatchError("embedding dimensions differ: " + std::to_string(a.dim()) + " vs " +
                        std::to_string(b.dim()));
  }
  return (a.values - b.values).norm();
}

double normalized_distance(const Embedding &a, const Embedding &b) {
  const double d = distance(a, b);
  return a.dim() == 0 ? 0.0 : d / std::sqrt(static_cast<double>(a.dim()));
}

Image<double> FeatureExtractor::grad_distance(const Frame &frame, const Embedding &target) const {
  return distance_and_grad(frame, target).gradient;
}

Image<double> grad_distance(const Frame &frame, const Embedding &target,
                            const FeatureExtractor &e) {
  if (target.extractor_id != e.id() || target.dim() != e.dim()) {
    throw MismatchError("target embedding does not belong to extractor '" + e.id() + "'");
  }
  return e.grad_distance(frame, target);
}

// ---------------------------------------------------------------------------

SurrogateEncoder::SurrogateEncoder(const SurrogateEncoderConfig &cfg, Index height, Index width)
    : cfg_(cfg), height_(height), width_(width) {
  if (cfg.pool_factor < 1 || cfg.dim < 1) {
    throw ValidationError("surrogate pool_factor and dim must be positive");
  }
  if (height % cfg.pool_factor != 0 || width % cfg.pool_factor != 0) {
    throw ShapeError("frame " + std::to_string(height) + "x" + std::to_string(width) +
                     " not divisible by pool factor " + std::to_string(cfg.pool_factor));
  }
  const Index pooled = (height / cfg.pool_factor) * (width / cfg.pool_factor) * kChannels;
  if (cfg.dim > pooled) {
    throw ShapeError("surrogate dim " + std::to_string(cfg.dim) + " exceeds pooled size " +
                     std::to_string(pooled));
  }
  SplitMix64 rng(cfg.seed);
  const double scale = std::sqrt(3.0 / static_cast<double>(pooled));
  weights_.resize(cfg.dim, pooled);
  for (Index r = 0; r < cfg.dim; ++r) {
    for (Index c = 0; c < pooled; ++c) {
      weights_(r, c) = rng.symmetric(scale);
    }
  }
  bias_.resize(cfg.dim);
  for (Index r = 0; r < cfg.dim; ++r) {
    bias_[r] = rng.symmetric(0.5);
  }
}

std::string SurrogateEncoder::id() const {
  return "surrogate:" + std::to_string(cfg_.seed) + ":p" + std::to_string(cfg_.pool_factor) +
         ":d" + std::to_string(cfg_.dim);
}

void SurrogateEncoder::check_shape(const Frame &frame) const {
  if (frame.height() != height_ || frame.width() != width_) {
    throw ShapeError("surrogate built for " + std::to_string(height_) + "x" +
                     std::to_string(width_) + ", got " + std::to_string(frame.height()) + "x" +
                     std::to_string(frame.width()));
  }
}

Eigen::VectorXd SurrogateEncoder::pool(const Frame &frame) const {
  check_shape(frame);
  const Index pf = cfg_.pool_factor;
  const Index ph = height_ / pf;
  const Index pw = width_ / pf;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ph * pw * kChannels);
  for (Index y = 0; y < height_; ++y) {
    for (Index x = 0; x < width_; ++x) {
      const Index cell = ((y / pf) * pw + (x / pf)) * kChannels;
      for (Index c = 0; c < kChannels; ++c) {
        out[cell + c] += frame(y, x, c);
      }
    }
  }
  return out / static_cast<double>(pf * pf);
}

Embedding SurrogateEncoder::encode(const Frame &frame) const {
  Eigen::VectorXd z = weights_ * pool(frame) + bias_;
  return {z.array().tanh().matrix(), id()};
}

DistanceAndGradient SurrogateEncoder::distance_and_grad(const Frame &frame,
                                                        const Embedding &target) const {
  const Embedding e = encode(frame);
  const double d = distance(e, target);
  Image<double> grad(height_, width_);
  if (d == 0.0) {
    return {0.0, std::move(grad)};
  }
  const Eigen::VectorXd dz =
      ((e.values - target.values) / d).cwiseProduct((1.0 - e.values.array().square()).matrix());
  const Eigen::VectorXd dpool = weights_.transpose() * dz;
  const Index pf = cfg_.pool_factor;
  const Index pw = width_ / pf;
  const double inv_area = 1.0 / static_cast<double>(pf * pf);
  for (Index y = 0; y < height_; ++y) {
    for (Index x = 0; x < width_; ++x) {
      const Index cell = ((y / pf) * pw + (x / pf)) * kChannels;
      for (Index c = 0; c < kChannels; ++c) {
        grad(y, x, c) = dpool[cell + c] * inv_area;
      }
    }
  }
  return {d, std::move(grad)};
}

// ---------------------------------------------------------------------------

Embedding IdentityEncoder::encode(const Frame &frame) const {
  if (frame.height() != height_ || frame.width() != width_) {
    throw ShapeError("identity extractor built for a different frame size");
  }
  return {frame.values().matrix(), id()};
}

DistanceAndGradient IdentityEncoder::distance_and_grad(const Frame &frame,
                                                       const Embedding &target) const {
  const Embedding e = encode(frame);
  const double d = distance(e, target);
  if (d == 0.0) {
    return {0.0, Image<double>(height_, width_)};
  }
  return {d, Image<double>(height_, width_, (e.values - target.values).array() / d)};
}

// ---------------------------------------------------------------------------

ExternalEncoder::ExternalEncoder(const std::string &command, std::chrono::milliseconds timeout)
    : proc_(std::make_unique<Subprocess>(command)), timeout_(timeout) {
  const auto reply = request(static_cast<std::uint8_t>(wire::Opcode::Hello), {});
  wire::Reader r(reply);
  id_ = r.str();
  dim_ = r.u32();
  r.expect_end();
  if (dim_ == 0) {
    throw ProtocolError("encoder process reported dim 0");
  }
}

ExternalEncoder::~ExternalEncoder() = default;

std::vector<std::uint8_t> ExternalEncoder::request(std::uint8_t opcode,
                                                   const std::vector<std::uint8_t> &payload) const {
  std::lock_guard lock(mutex_);
  proc_->write_all(wire::frame_message(opcode, payload), timeout_);
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  wire::Bytes buffer;
  for (;;) {
    if (auto msg = wire::take_message(buffer)) {
      if (!buffer.empty()) {
        throw ProtocolError("unexpected bytes after reply");
      }
      if (msg->opcode == static_cast<std::uint8_t>(wire::Opcode::Error)) {
        wire::Reader r(msg->payload);
        throw ProtocolError("encoder process error: " + r.str());
      }
      if (msg->opcode != opcode) {
        throw ProtocolError("reply opcode " + std::to_string(msg->opcode) + " to request " +
                            std::to_string(opcode));
      }
      return std::move(msg->payload);
    }
    const auto chunk = proc_->read_some(deadline);
    buffer.insert(buffer.end(), chunk.begin(), chunk.end());
  }
}

Embedding ExternalEncoder::encode(const Frame &frame) const {
  wire::Writer w;
  w.frame(frame);
  const auto reply = request(static_cast<std::uint8_t>(wire::Opcode::Encode), w.take());
  wire::Reader r(reply);
  Embedding e{r.f32s(dim_), id_};
  r.expect_end();
  if (!e.values.allFinite()) {
    throw ProtocolError("encoder returned non-finite embedding");
  }
  return e;
}

Image<double> ExternalEncoder::grad_distance(const Frame &frame, const Embedding &target) const {
  if (target.dim() != dim_) {
    throw MismatchError("target dimension does not match encoder process");
  }
  wire::Writer w;
  w.frame(frame);
  w.f32s(target.values);
  const auto reply = request(static_cast<std::uint8_t>(wire::Opcode::Grad), w.take());
  wire::Reader r(reply);
  Image<double> g(frame.height(), frame.width(), r.f32s(frame.size()).array());
  r.expect_end();
  return g;
}

DistanceAndGradient ExternalEncoder::distance_and_grad(const Frame &frame,
                                                       const Embedding &target) const {
  const double d = distance(encode(frame), target);
  return {d, grad_distance(frame, target)};
}

std::unique_ptr<FeatureExtractor> external_encoder(const std::string &command,
                                                   std::chrono::milliseconds timeout) {
  return std::make_unique<ExternalEncoder>(command, timeout);
}

std::unique_ptr<FeatureExtractor> make_encoder(const std::string &spec, Index height, Index width,
                                               const SurrogateEncoderConfig &defaults) {
  if (spec.rfind("ext:", 0) == 0) {
    std::string cmd = spec.substr(4);
    if (cmd.size() >= 2 && cmd.front() == '"' && cmd.back() == '"') {
      cmd = cmd.substr(1, cmd.size() - 2);
    }
    if (cmd.empty()) {
      throw ValidationError("ext: encoder needs a command");
    }
    return external_encoder(cmd);
  }
  if (spec == "identity") {
    return std::make_unique<IdentityEncoder>(height, width);
  }
  if (spec == "builtin" || spec.rfind("builtin:", 0) == 0) {
    SurrogateEncoderConfig cfg = defaults;
    if (spec.size() > 8) {
      try {
        cfg.seed = std::stoull(spec.substr(8));
      } catch (const std::exception &) {
        throw ValidationError("bad builtin encoder seed in '" + spec + "'");
      }
    }
    return std::make_unique<SurrogateEncoder>(cfg, height, width);
  }
  throw ValidationError("unknown encoder '" + spec + "' (builtin:SEED | identity | ext:CMD)");
}

} // namespace scenecloak
