#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scenecloak/image.hpp"

// Byte-level helpers for the encoder subprocess protocol (see ExternalEncoder).
namespace scenecloak::wire {

enum class Opcode : std::uint8_t { Hello = 0, Encode = 1, Grad = 2, Error = 3 };

using Bytes = std::vector<std::uint8_t>;

struct Message {
  std::uint8_t opcode = 0;
  Bytes payload;
};

/// Refuse anything larger than this many bytes in one message.
inline constexpr std::uint32_t kMaxMessage = 256u << 20;

Bytes frame_message(std::uint8_t opcode, const Bytes &payload);

/// Pulls one complete message off the front of `buffer`, if present.
/// Throws ProtocolError for a zero or oversized length prefix.
std::optional<Message> take_message(Bytes &buffer);

class Writer {
public:
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void f32(float v);
  void str(const std::string &s);
  void frame(const Frame &f);
  template <typename Derived> void f32s(const Eigen::DenseBase<Derived> &v) {
    for (Index i = 0; i < v.size(); ++i) {
      f32(static_cast<float>(v.derived().coeff(i)));
    }
  }
  Bytes take() { return std::move(bytes_); }

private:
  Bytes bytes_;
};

/// Bounds-checked reader; every overrun throws ProtocolError.
class Reader {
public:
  explicit Reader(const Bytes &bytes) : bytes_(bytes) {}

  std::uint16_t u16();
  std::uint32_t u32();
  float f32();
  std::string str();
  Frame frame();
  Eigen::VectorXd f32s(Index count);
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void expect_end() const;

private:
  const Bytes &bytes_;
  std::size_t pos_ = 0;
};

} // namespace scenecloak::wire
