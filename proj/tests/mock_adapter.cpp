// Test double for an external encoder process. Speaks the wire protocol on
// stdin/stdout and answers with the builtin surrogate.
//
//   mock_adapter [--seed S] [--pool P] [--dim D] [--mode M]
//
// modes: normal, dim0, die (exit on first request after HELLO), hang,
// error (ERROR reply to every request), short (truncated reply),
// scorer (D = 1, embedding = mean value), genres:N (D = N, embedding =
// per-channel means of the first N channels, cycling).

#include <chrono>
#include <cstdlib>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <unistd.h>

#include "scenecloak/encoder.hpp"
#include "scenecloak/wire.hpp"

using namespace scenecloak;
namespace w = scenecloak::wire;

namespace {

bool read_exact(std::uint8_t *p, std::size_t n) {
  while (n > 0) {
    const ssize_t got = ::read(0, p, n);
    if (got <= 0) {
      return false;
    }
    p += got;
    n -= static_cast<std::size_t>(got);
  }
  return true;
}

void write_all(const w::Bytes &b) {
  std::size_t off = 0;
  while (off < b.size()) {
    const ssize_t put = ::write(1, b.data() + off, b.size() - off);
    if (put <= 0) {
      std::exit(3);
    }
    off += static_cast<std::size_t>(put);
  }
}

void reply(w::Opcode op, const w::Bytes &payload) {
  write_all(w::frame_message(static_cast<std::uint8_t>(op), payload));
}

void reply_error(const std::string &msg) {
  w::Writer out;
  out.str(msg);
  reply(w::Opcode::Error, out.take());
}

} // namespace

int main(int argc, char **argv) {
  SurrogateEncoderConfig cfg;
  std::string mode = "normal";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string k = argv[i];
    const std::string v = argv[i + 1];
    if (k == "--seed") {
      cfg.seed = std::stoull(v);
    } else if (k == "--pool") {
      cfg.pool_factor = std::stol(v);
    } else if (k == "--dim") {
      cfg.dim = std::stol(v);
    } else if (k == "--mode") {
      mode = v;
    }
  }
  Index genres = 0;
  if (mode.rfind("genres:", 0) == 0) {
    genres = std::stol(mode.substr(7));
  }
  const Index dim = mode == "dim0" ? 0 : mode == "scorer" ? 1 : genres > 0 ? genres : cfg.dim;
  std::map<std::pair<Index, Index>, std::unique_ptr<SurrogateEncoder>> encoders;

  for (;;) {
    std::uint8_t head[5];
    if (!read_exact(head, 5)) {
      return 0;
    }
    const std::uint32_t len = head[0] | (head[1] << 8) | (head[2] << 16) |
                              (static_cast<std::uint32_t>(head[3]) << 24);
    if (len == 0 || len > w::kMaxMessage) {
      return 1;
    }
    w::Bytes payload(len - 1);
    if (!read_exact(payload.data(), payload.size())) {
      return 0;
    }
    const auto op = static_cast<w::Opcode>(head[4]);
    if (op == w::Opcode::Hello) {
      w::Writer out;
      out.str(mode == "normal" ? "surrogate:" + std::to_string(cfg.seed) + ":p" +
                                     std::to_string(cfg.pool_factor) + ":d" +
                                     std::to_string(cfg.dim)
                               : "mock-" + mode);
      out.u32(static_cast<std::uint32_t>(dim));
      reply(w::Opcode::Hello, out.take());
      continue;
    }
    if (mode == "die") {
      return 0;
    }
    if (mode == "hang") {
      std::this_thread::sleep_for(std::chrono::seconds(30));
      return 0;
    }
    if (mode == "error") {
      reply_error("mock refuses");
      continue;
    }
    try {
      w::Reader in(payload);
      const Frame f = in.frame();
      w::Writer out;
      if (mode == "scorer") {
        in.expect_end();
        out.f32(static_cast<float>(f.values().mean()));
        reply(op, out.take());
        continue;
      }
      if (genres > 0) {
        in.expect_end();
        for (Index g = 0; g < genres; ++g) {
          double s = 0.0;
          for (Index i = g % kChannels; i < f.size(); i += kChannels) {
            s += f.values()[i];
          }
          out.f32(static_cast<float>(s / static_cast<double>(f.size() / kChannels)));
        }
        reply(op, out.take());
        continue;
      }
      auto &enc = encoders[{f.height(), f.width()}];
      if (!enc) {
        enc = std::make_unique<SurrogateEncoder>(cfg, f.height(), f.width());
      }
      if (op == w::Opcode::Encode) {
        in.expect_end();
        out.f32s(enc->encode(f).values);
      } else if (op == w::Opcode::Grad) {
        Embedding target{in.f32s(dim), enc->id()};
        in.expect_end();
        out.f32s(enc->grad_distance(f, target).values());
      } else {
        reply_error("unknown opcode");
        continue;
      }
      w::Bytes bytes = out.take();
      if (mode == "short") {
        bytes.resize(bytes.size() / 2);
      }
      reply(op, bytes);
    } catch (const std::exception &e) {
      reply_error(e.what());
    }
  }
}
