#include "scenecloak/frameio.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

namespace scenecloak {

namespace {

static_assert(std::endian::native == std::endian::little,
              "FVDT encoding assumes a little-endian host");

std::uint8_t quantize(double v) {
  // round-half-up: 0.5 * 255 = 127.5 -> 128
  const double scaled = std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
  return static_cast<std::uint8_t>(std::min(scaled, 255.0));
}

template <typename T> void put(std::vector<std::uint8_t> &out, T v) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T> T get(const std::vector<std::uint8_t> &in, std::size_t &pos) {
  if (pos + sizeof(T) > in.size()) {
    throw FormatError("FVDT: truncated header");
  }
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

} // namespace

void validate_manifest(const SceneManifest &m) {
  if (m.total_frames == 0) {
    throw ValidationError("manifest covers zero frames");
  }
  std::size_t cursor = 0;
  for (const auto &s : m.scenes) {
    if (s.end <= s.start) {
      throw ValidationError("empty scene [" + std::to_string(s.start) + ", " +
                            std::to_string(s.end) + ")");
    }
    if (s.start < cursor) {
      throw ValidationError("overlapping scenes at frame " + std::to_string(s.start));
    }
    if (s.start > cursor) {
      throw ValidationError("gap in scene coverage at frame " + std::to_string(cursor));
    }
    cursor = s.end;
  }
  if (cursor != m.total_frames) {
    throw ValidationError("scenes cover " + std::to_string(cursor) + " of " +
                          std::to_string(m.total_frames) + " frames");
  }
}

SceneManifest whole_sequence_manifest(std::size_t total_frames, double epsilon_scene) {
  return {{SceneRange{0, total_frames, "", epsilon_scene}}, total_frames};
}

Frame read_png(const fs::path &path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot read " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode " + path.string() + ": " + image.message);
  }
  const Index h = image.height;
  const Index w = image.width;
  Eigen::Map<const Eigen::Array<std::uint8_t, Eigen::Dynamic, 1>> bytes(buffer.data(),
                                                                         h * w * kChannels);
  return Frame(h, w, bytes.cast<double>() / 255.0);
}

void write_png(const Frame &frame, const fs::path &path) {
  std::vector<std::uint8_t> buffer(static_cast<std::size_t>(frame.size()));
  std::transform(frame.values().begin(), frame.values().end(), buffer.begin(), quantize);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width());
  image.height = static_cast<png_uint_32>(frame.height());
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw IoError("cannot write " + path.string() + ": " + image.message);
  }
}

std::string frame_filename(std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "frame_%06zu.png", index);
  return name;
}

FrameSequence load_sequence(const fs::path &dir) {
  if (!fs::is_directory(dir)) {
    throw IoError("not a directory: " + dir.string());
  }
  static const std::regex pattern(R"(frame_(\d{6})\.png)");
  std::map<std::size_t, fs::path> found;
  for (const auto &entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) {
      found.emplace(std::stoul(m[1].str()), entry.path());
    }
  }
  if (found.empty()) {
    throw ValidationError("no frame_%06d.png files in " + dir.string());
  }
  FrameSequence seq;
  seq.source_id = dir.filename().string();
  std::size_t expected = 0;
  for (const auto &[index, path] : found) {
    if (index != expected) {
      throw GapError(expected);
    }
    seq.frames.push_back(read_png(path));
    if (!seq.frames.back().same_shape(seq.frames.front())) {
      throw ShapeError("frame " + std::to_string(index) + " differs in size from frame 0");
    }
    ++expected;
  }
  return seq;
}

void save_sequence(const FrameSequence &seq, const fs::path &dir) {
  validate_sequence(seq);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    write_png(seq.frames[i], dir / frame_filename(i));
  }
}

std::vector<std::uint8_t> encode_delta(const PerturbationTensor &t) {
  validate_perturbation(t);
  std::vector<std::uint8_t> out;
  out.reserve(18 + static_cast<std::size_t>(t.deltas.size()) * 4);
  out.insert(out.end(), {'F', 'V', 'D', 'T'});
  put<std::uint16_t>(out, kDeltaVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.deltas.height()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.deltas.width()));
  put<float>(out, t.budget);
  const auto *raw = reinterpret_cast<const std::uint8_t *>(t.deltas.values().data());
  out.insert(out.end(), raw, raw + t.deltas.size() * sizeof(float));
  return out;
}

PerturbationTensor decode_delta(const std::vector<std::uint8_t> &bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "FVDT", 4) != 0) {
    throw FormatError("FVDT: bad magic");
  }
  std::size_t pos = 4;
  const auto version = get<std::uint16_t>(bytes, pos);
  if (version != kDeltaVersion) {
    throw FormatError("FVDT: unsupported version " + std::to_string(version));
  }
  const auto h = get<std::uint32_t>(bytes, pos);
  const auto w = get<std::uint32_t>(bytes, pos);
  const auto budget = get<float>(bytes, pos);
  const std::uint64_t count = std::uint64_t{h} * w * kChannels;
  if (h == 0 || w == 0 || bytes.size() - pos != count * sizeof(float)) {
    throw FormatError("FVDT: payload size mismatch for " + std::to_string(h) + "x" +
                      std::to_string(w));
  }
  Image<float>::Array values(static_cast<Index>(count));
  std::memcpy(values.data(), bytes.data() + pos, count * sizeof(float));
  return {Image<float>(h, w, values), budget};
}

void write_delta(const PerturbationTensor &t, const fs::path &path) {
  const auto bytes = encode_delta(t);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
}

PerturbationTensor read_delta(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_delta(bytes);
}

std::string manifest_to_json(const SceneManifest &m) {
  validate_manifest(m);
  nlohmann::json j;
  j["total_frames"] = m.total_frames;
  j["scenes"] = nlohmann::json::array();
  for (const auto &s : m.scenes) {
    j["scenes"].push_back({{"start", s.start},
                           {"end", s.end},
                           {"target_file", s.target_file},
                           {"epsilon_scene", s.epsilon_scene}});
  }
  return j.dump(2) + "\n";
}

SceneManifest manifest_from_json(const std::string &text) {
  SceneManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.total_frames = j.at("total_frames").get<std::size_t>();
    for (const auto &s : j.at("scenes")) {
      m.scenes.push_back({s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>(),
                          s.value("target_file", std::string{}), s.value("epsilon_scene", 0.0)});
    }
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  validate_manifest(m);
  return m;
}

void write_manifest(const SceneManifest &m, const fs::path &path) {
  write_text_file(path, manifest_to_json(m));
}

SceneManifest read_manifest(const fs::path &path) { return manifest_from_json(read_text_file(path)); }

std::string read_text_file(const fs::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path &path, const std::string &text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
}

} // namespace scenecloak
