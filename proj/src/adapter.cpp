#include "selcal/adapter.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

#include "json.hpp"

#include "selcal/errors.hpp"

namespace selcal {
namespace {

std::string errno_message(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

void ignore_sigpipe_once() {
  static const bool done = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

}  // namespace

AdapterConnection::AdapterConnection(const std::string& command) : command_(command) {
  ignore_sigpipe_once();
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw AdapterError(errno_message("adapter pipe"));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw AdapterError(errno_message("adapter pipe"));
  }

  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw AdapterError(errno_message("adapter fork"));
  }
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

AdapterConnection::~AdapterConnection() { shutdown(); }

void AdapterConnection::shutdown() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
    pid_ = -1;
  }
}

void AdapterConnection::write_all(const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw AdapterError(errno_message(("adapter '" + command_ + "' write").c_str()));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string AdapterConnection::read_line() {
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw AdapterError(errno_message(("adapter '" + command_ + "' read").c_str()));
    }
    if (n == 0) throw AdapterError("adapter '" + command_ + "' closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

double AdapterConnection::query(const std::string& a, const std::string& b) {
  if (to_child_ < 0) throw AdapterError("adapter '" + command_ + "' is not running");
  const nlohmann::json request = {{"a", a}, {"b", b}};
  write_all(request.dump() + "\n");
  const std::string line = read_line();

  nlohmann::json response;
  try {
    response = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw AdapterError("adapter '" + command_ + "' sent malformed JSON: " + e.what());
  }
  if (!response.is_object() || !response.contains("score") ||
      !response["score"].is_number()) {
    throw AdapterError("adapter '" + command_ + "' response lacks numeric \"score\": " + line);
  }
  const double score = response["score"].get<double>();
  if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
    throw AdapterError("adapter '" + command_ + "' returned score " + line +
                       " outside [0, 1]");
  }
  return score;
}

AdapterPool::AdapterPool(std::string command, std::size_t size) : command_(std::move(command)) {
  if (size == 0) throw InvalidArgument("adapter pool size must be >= 1");
  connections_.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    connections_.push_back(std::make_unique<AdapterConnection>(command_));
    idle_.push_back(size - 1 - i);
  }
}

double AdapterPool::query(const std::string& a, const std::string& b) {
  std::size_t slot = 0;
  {
    std::unique_lock lock(mutex_);
    available_.wait(lock, [&] { return !idle_.empty(); });
    slot = idle_.back();
    idle_.pop_back();
  }
  struct Release {
    AdapterPool* pool;
    std::size_t slot;
    ~Release() {
      {
        std::lock_guard lock(pool->mutex_);
        pool->idle_.push_back(slot);
      }
      pool->available_.notify_one();
    }
  } release{this, slot};
  return connections_[slot]->query(a, b);
}

AdapterSimilarity::AdapterSimilarity(std::string name, std::shared_ptr<AdapterPool> pool)
    : name_(std::move(name)), pool_(std::move(pool)) {
  if (!pool_) throw InvalidArgument("adapter similarity needs a pool");
}

double AdapterSimilarity::operator()(const NormalizedAnswer& candidate,
                                     const NormalizedAnswer& reference) const {
  return pool_->query(candidate.text(), reference.text());
}

}  // namespace selcal
