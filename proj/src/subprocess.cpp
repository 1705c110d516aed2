#include "subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "scenecloak/errors.hpp"

extern char **environ;

namespace scenecloak {

namespace {

void ignore_sigpipe() {
  struct sigaction current {};
  sigaction(SIGPIPE, nullptr, &current);
  if (current.sa_handler == SIG_DFL) {
    signal(SIGPIPE, SIG_IGN);
  }
}

int remaining_ms(std::chrono::steady_clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
      deadline - std::chrono::steady_clock::now());
  return left.count() < 0 ? 0 : static_cast<int>(left.count());
}

} // namespace

Subprocess::Subprocess(const std::string &command) {
  ignore_sigpipe();
  int in_pipe[2];  // parent -> child
  int out_pipe[2]; // child -> parent
  if (pipe2(in_pipe, O_CLOEXEC) != 0) {
    throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
  }
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

  std::string sh = "/bin/sh";
  std::string flag = "-c";
  std::string cmd = command;
  char *argv[] = {sh.data(), flag.data(), cmd.data(), nullptr};
  // own process group so a kill also reaches whatever the shell started
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);
  const int rc = posix_spawn(&pid_, "/bin/sh", &actions, &attr, argv, environ);
  posix_spawnattr_destroy(&attr);
  posix_spawn_file_actions_destroy(&actions);
  close(in_pipe[0]);
  close(out_pipe[1]);
  if (rc != 0) {
    close(in_pipe[1]);
    close(out_pipe[0]);
    throw ProtocolError(std::string("spawn failed: ") + std::strerror(rc));
  }
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  fcntl(to_child_, F_SETFL, fcntl(to_child_, F_GETFL) | O_NONBLOCK);
  fcntl(from_child_, F_SETFL, fcntl(from_child_, F_GETFL) | O_NONBLOCK);
}

Subprocess::~Subprocess() {
  if (to_child_ >= 0) {
    close(to_child_);
  }
  if (from_child_ >= 0) {
    close(from_child_);
  }
  if (pid_ > 0) {
    int status = 0;
    // Closing stdin is the shutdown signal; give the child a moment.
    for (int i = 0; i < 50; ++i) {
      if (waitpid(pid_, &status, WNOHANG) == pid_) {
        kill(-pid_, SIGKILL);
        return;
      }
      usleep(2000);
    }
    kill(-pid_, SIGKILL);
    waitpid(pid_, &status, 0);
  }
}

void Subprocess::write_all(const std::vector<std::uint8_t> &bytes,
                           std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::size_t done = 0;
  while (done < bytes.size()) {
    pollfd pfd{to_child_, POLLOUT, 0};
    const int ready = poll(&pfd, 1, remaining_ms(deadline));
    if (ready == 0) {
      throw ProtocolError("timeout writing to encoder process");
    }
    if (ready < 0) {
      if (errno == EINTR) {
        continue;
      }
      throw ProtocolError(std::string("poll: ") + std::strerror(errno));
    }
    const ssize_t n = write(to_child_, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) {
        continue;
      }
      throw ProtocolError(std::string("encoder process closed its input: ") +
                          std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::vector<std::uint8_t> Subprocess::read_some(std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = poll(&pfd, 1, remaining_ms(deadline));
    if (ready == 0) {
      throw ProtocolError("timeout waiting for encoder process");
    }
    if (ready < 0) {
      if (errno == EINTR) {
        continue;
      }
      throw ProtocolError(std::string("poll: ") + std::strerror(errno));
    }
    std::vector<std::uint8_t> buf(1 << 16);
    const ssize_t n = read(from_child_, buf.data(), buf.size());
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) {
        continue;
      }
      throw ProtocolError(std::string("read: ") + std::strerror(errno));
    }
    if (n == 0) {
      throw ProtocolError("encoder process closed its output (eof)");
    }
    buf.resize(static_cast<std::size_t>(n));
    return buf;
  }
}

bool Subprocess::alive() {
  if (pid_ <= 0) {
    return false;
  }
  int status = 0;
  if (waitpid(pid_, &status, WNOHANG) == pid_) {
    pid_ = -1;
    return false;
  }
  return true;
}

} // namespace scenecloak
