#include "scenecloak/wire.hpp"

#include <cstring>

namespace scenecloak::wire {

namespace {

template <typename T> void append(Bytes &out, T v) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

} // namespace

Bytes frame_message(std::uint8_t opcode, const Bytes &payload) {
  Bytes out;
  out.reserve(payload.size() + 5);
  append<std::uint32_t>(out, static_cast<std::uint32_t>(payload.size() + 1));
  out.push_back(opcode);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::optional<Message> take_message(Bytes &buffer) {
  if (buffer.size() < 4) {
    return std::nullopt;
  }
  std::uint32_t length = 0;
  std::memcpy(&length, buffer.data(), 4);
  if (length == 0 || length > kMaxMessage) {
    throw ProtocolError("invalid message length " + std::to_string(length));
  }
  if (buffer.size() < 4 + std::size_t{length}) {
    return std::nullopt;
  }
  Message m;
  m.opcode = buffer[4];
  m.payload.assign(buffer.begin() + 5, buffer.begin() + 4 + length);
  buffer.erase(buffer.begin(), buffer.begin() + 4 + length);
  return m;
}

void Writer::u16(std::uint16_t v) { append(bytes_, v); }
void Writer::u32(std::uint32_t v) { append(bytes_, v); }
void Writer::f32(float v) { append(bytes_, v); }

void Writer::str(const std::string &s) {
  u16(static_cast<std::uint16_t>(s.size()));
  bytes_.insert(bytes_.end(), s.begin(), s.end());
}

void Writer::frame(const Frame &f) {
  u32(static_cast<std::uint32_t>(f.height()));
  u32(static_cast<std::uint32_t>(f.width()));
  f32s(f.values());
}

std::uint16_t Reader::u16() {
  if (remaining() < 2) {
    throw ProtocolError("truncated u16");
  }
  std::uint16_t v;
  std::memcpy(&v, bytes_.data() + pos_, 2);
  pos_ += 2;
  return v;
}

std::uint32_t Reader::u32() {
  if (remaining() < 4) {
    throw ProtocolError("truncated u32");
  }
  std::uint32_t v;
  std::memcpy(&v, bytes_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

float Reader::f32() {
  if (remaining() < 4) {
    throw ProtocolError("truncated f32");
  }
  float v;
  std::memcpy(&v, bytes_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

std::string Reader::str() {
  const std::size_t n = u16();
  if (remaining() < n) {
    throw ProtocolError("truncated string");
  }
  std::string s(reinterpret_cast<const char *>(bytes_.data() + pos_), n);
  pos_ += n;
  return s;
}

Frame Reader::frame() {
  const std::uint64_t h = u32();
  const std::uint64_t w = u32();
  const std::uint64_t count = h * w * kChannels;
  if (h == 0 || w == 0 || count * 4 > remaining()) {
    throw ProtocolError("frame payload does not hold " + std::to_string(h) + "x" +
                        std::to_string(w) + "x3 values");
  }
  return Frame(static_cast<Index>(h), static_cast<Index>(w), f32s(static_cast<Index>(count)).array());
}

Eigen::VectorXd Reader::f32s(Index count) {
  if (count < 0 || static_cast<std::size_t>(count) * 4 > remaining()) {
    throw ProtocolError("truncated f32 array");
  }
  Eigen::VectorXf tmp(count);
  std::memcpy(tmp.data(), bytes_.data() + pos_, static_cast<std::size_t>(count) * 4);
  pos_ += static_cast<std::size_t>(count) * 4;
  return tmp.cast<double>();
}

void Reader::expect_end() const {
  if (remaining() != 0) {
    throw ProtocolError(std::to_string(remaining()) + " trailing bytes");
  }
}

} // namespace scenecloak::wire
