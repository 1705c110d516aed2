#pragma once

#include <sys/types.h>

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

namespace scenecloak {

// Child process running `/bin/sh -c command` with its stdin/stdout piped to
// us. stderr is inherited. All failures surface as ProtocolError.
class Subprocess {
public:
  explicit Subprocess(const std::string &command);
  ~Subprocess();

  Subprocess(const Subprocess &) = delete;
  Subprocess &operator=(const Subprocess &) = delete;

  void write_all(const std::vector<std::uint8_t> &bytes, std::chrono::milliseconds timeout);

  /// Reads whatever is available (at least one byte) before the deadline.
  std::vector<std::uint8_t> read_some(std::chrono::steady_clock::time_point deadline);

  bool alive();

private:
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
};

} // namespace scenecloak
