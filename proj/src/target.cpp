#include "scenecloak/target.hpp"

#include <limits>

namespace scenecloak {

BaseMethod parse_base_method(const std::string &name) {
  if (name == "average") {
    return BaseMethod::SceneAverage;
  }
  if (name == "middle") {
    return BaseMethod::MiddleFrame;
  }
  if (name == "medoid") {
    return BaseMethod::EmbeddingMedoid;
  }
  throw ValidationError("unknown target base '" + name + "' (average|middle|medoid)");
}

std::string to_string(BaseMethod m) {
  switch (m) {
  case BaseMethod::SceneAverage:
    return "average";
  case BaseMethod::MiddleFrame:
    return "middle";
  case BaseMethod::EmbeddingMedoid:
    return "medoid";
  }
  return "?";
}

void TargetSpec::validate() const {
  if (!(blend_lambda >= 0.0 && blend_lambda <= 1.0)) {
    throw ValidationError("blend_lambda must lie in [0, 1]");
  }
}

Frame base_image(std::span<const Frame> scene_frames, BaseMethod method,
                 const FeatureExtractor *extractor) {
  if (scene_frames.empty()) {
    throw ValidationError("base_image: empty scene");
  }
  for (const auto &f : scene_frames) {
    require_same_shape(f, scene_frames.front(), "base_image");
  }
  switch (method) {
  case BaseMethod::SceneAverage: {
    Frame::Array sum = Frame::Array::Zero(scene_frames.front().size());
    for (const auto &f : scene_frames) {
      sum += f.values();
    }
    return Frame(scene_frames.front().height(), scene_frames.front().width(),
                 sum / static_cast<double>(scene_frames.size()));
  }
  case BaseMethod::MiddleFrame:
    return scene_frames[scene_frames.size() / 2];
  case BaseMethod::EmbeddingMedoid: {
    if (extractor == nullptr) {
      throw ValidationError("medoid base needs a feature extractor");
    }
    std::vector<Embedding> embeddings;
    embeddings.reserve(scene_frames.size());
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(extractor->dim());
    for (const auto &f : scene_frames) {
      embeddings.push_back(extractor->encode(f));
      centroid += embeddings.back().values;
    }
    centroid /= static_cast<double>(scene_frames.size());
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
      const double d = (embeddings[i].values - centroid).norm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return scene_frames[best];
  }
  }
  throw ValidationError("unknown base method");
}

Frame blend_target(const Frame &base, const TargetSpec &spec) {
  spec.validate();
  if (!spec.style_image) {
    return base;
  }
  require_same_shape(base, *spec.style_image, "make_target");
  const double lambda = spec.blend_lambda;
  if (lambda == 0.0) {
    return base;
  }
  if (lambda == 1.0) {
    return *spec.style_image;
  }
  return Frame(base.height(), base.width(),
               ((1.0 - lambda) * base.values() + lambda * spec.style_image->values())
                   .max(0.0)
                   .min(1.0));
}

Frame make_target(std::span<const Frame> scene_frames, const TargetSpec &spec,
                  const FeatureExtractor *extractor) {
  spec.validate();
  return blend_target(base_image(scene_frames, spec.base_method, extractor), spec);
}

Frame checkerboard(Index height, Index width, Index cell) {
  if (cell < 1) {
    throw ValidationError("checkerboard cell must be positive");
  }
  Frame out(height, width);
  for (Index y = 0; y < height; ++y) {
    for (Index x = 0; x < width; ++x) {
      const double v = ((y / cell) + (x / cell)) % 2 == 0 ? 1.0 : 0.0;
      for (Index c = 0; c < kChannels; ++c) {
        out(y, x, c) = v;
      }
    }
  }
  return out;
}

} // namespace scenecloak
