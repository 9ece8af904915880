#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <iostream>

#include "coopcache/policies.hpp"

extern char** environ;

namespace coopcache {

namespace {

constexpr std::size_t kMaxFrameBytes = 1 << 20;

int remaining_ms(std::chrono::steady_clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
      deadline - std::chrono::steady_clock::now());
  return static_cast<int>(std::max<long long>(0, left.count()));
}

}  // namespace

ExternalPolicy::ExternalPolicy(AdapterConfig config)
    : config_(std::move(config)) {
  // A child that exits mid-write must surface as a write error, not kill us.
  std::signal(SIGPIPE, SIG_IGN);
}

ExternalPolicy::~ExternalPolicy() { terminate(); }

void ExternalPolicy::spawn() {
  int in[2];
  int out[2];
  if (pipe2(in, O_CLOEXEC) != 0) {
    throw ConfigError(std::string("extern: pipe failed: ") + std::strerror(errno));
  }
  if (pipe2(out, O_CLOEXEC) != 0) {
    close(in[0]);
    close(in[1]);
    throw ConfigError(std::string("extern: pipe failed: ") + std::strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out[1], STDOUT_FILENO);
  std::string shell = "/bin/sh";
  std::string flag = "-c";
  std::string cmd = config_.command;
  char* argv[] = {shell.data(), flag.data(), cmd.data(), nullptr};
  // Own process group so a kill reaches every process the shell started.
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);
  pid_t pid = -1;
  int rc = posix_spawn(&pid, shell.c_str(), &actions, &attr, argv, environ);
  posix_spawnattr_destroy(&attr);
  posix_spawn_file_actions_destroy(&actions);
  close(in[0]);
  close(out[1]);
  if (rc != 0) {
    close(in[1]);
    close(out[0]);
    throw ConfigError("extern: cannot spawn '" + config_.command +
                      "': " + std::strerror(rc));
  }
  pid_ = pid;
  to_child_ = in[1];
  from_child_ = out[0];
  fcntl(to_child_, F_SETFL, fcntl(to_child_, F_GETFL) | O_NONBLOCK);
  buffer_.clear();
}

int ExternalPolicy::terminate() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  int exit_code = -1;
  if (pid_ > 0) {
    int status = 0;
    // Reap first so an already-exited child reports its own status.
    pid_t reaped = waitpid(pid_, &status, WNOHANG);
    // After EOF the child is usually exiting; give it a moment to be reaped.
    for (int i = 0; reaped == 0 && !timed_out_ && i < 40; ++i) {
      usleep(5000);
      reaped = waitpid(pid_, &status, WNOHANG);
    }
    if (reaped == 0) {
      kill(-pid_, SIGKILL);
      waitpid(pid_, &status, 0);
    } else if (reaped == pid_ && WIFEXITED(status)) {
      exit_code = WEXITSTATUS(status);
    }
  }
  pid_ = -1;
  buffer_.clear();
  return exit_code;
}

bool ExternalPolicy::write_all(const std::string& data,
                               std::chrono::steady_clock::time_point deadline) {
  std::size_t done = 0;
  while (done < data.size()) {
    ssize_t n = write(to_child_, data.data() + done, data.size() - done);
    if (n > 0) {
      done += static_cast<std::size_t>(n);
      continue;
    }
    if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
      return false;
    }
    pollfd pfd{to_child_, POLLOUT, 0};
    int ready = poll(&pfd, 1, remaining_ms(deadline));
    if (ready == 0) {
      timed_out_ = true;
      return false;
    }
    if (ready < 0 && errno != EINTR) return false;
  }
  return true;
}

bool ExternalPolicy::fill(std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    pollfd pfd{from_child_, POLLIN, 0};
    int ready = poll(&pfd, 1, remaining_ms(deadline));
    if (ready == 0) {
      timed_out_ = true;
      return false;
    }
    if (ready < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    char chunk[4096];
    ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    buffer_.append(chunk, static_cast<std::size_t>(n));
    return true;
  }
}

bool ExternalPolicy::read_frame(std::string& payload,
                                std::chrono::steady_clock::time_point deadline) {
  std::size_t eol;
  while ((eol = buffer_.find('\n')) == std::string::npos) {
    if (buffer_.size() > 32) return false;
    if (!fill(deadline)) return false;
  }
  std::string_view header(buffer_.data(), eol);
  if (header.substr(0, 4) != "LEN " || header.size() == 4 || header.size() > 12) {
    return false;
  }
  std::size_t length = 0;
  for (char c : header.substr(4)) {
    if (c < '0' || c > '9') return false;
    length = length * 10 + static_cast<std::size_t>(c - '0');
  }
  if (length > kMaxFrameBytes) return false;
  buffer_.erase(0, eol + 1);
  while (buffer_.size() < length) {
    if (!fill(deadline)) return false;
  }
  payload = buffer_.substr(0, length);
  buffer_.erase(0, length);
  return true;
}

std::string ExternalPolicy::exchange(const std::string& prompt) {
  if (pid_ < 0) spawn();
  timed_out_ = false;
  auto deadline = std::chrono::steady_clock::now() + config_.timeout;
  std::string frame = "LEN " + std::to_string(prompt.size()) + "\n" + prompt;
  std::string reply;
  if (write_all(frame, deadline) && read_frame(reply, deadline)) {
    answered_once_ = true;
    return reply;
  }
  if (timed_out_) {
    ++timeouts_;
    std::cerr << "extern: no reply within " << config_.timeout.count()
              << " ms; restarting '" << config_.command << "'\n";
  } else {
    ++failures_;
    std::cerr << "extern: adapter closed or sent a malformed frame; "
                 "restarting '" << config_.command << "'\n";
  }
  int exit_code = terminate();
  if (!answered_once_ && (exit_code == 126 || exit_code == 127)) {
    throw ConfigError("extern: command not runnable: " + config_.command);
  }
  return {};
}

std::string ExternalPolicy::decide(const SlotObservation& obs,
                                   const DecisionContext&) {
  return exchange(encode(obs));
}

}  // namespace coopcache
