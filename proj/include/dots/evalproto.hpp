#pragma once

#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "dots/objective.hpp"
#include "dots/space.hpp"

namespace dots {

/// The wire spoke nonsense: unparseable line, unexpected id, bad handshake.
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The transport itself died: peer closed, broken pipe, connect failure.
struct SessionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A specific evaluation failed: evaluator-reported error or timeout.
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvalRequest {
  std::uint64_t id = 0;
  std::vector<double> x;
};

struct EvalResponse {
  std::uint64_t id = 0;
  std::optional<double> y;
  std::optional<std::string> error;
};

/// Byte stream carrying newline-delimited JSON, one message per line.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send_line(const std::string& line) = 0;
  /// Next full line without its newline; nullopt on timeout. Throws
  /// SessionError once the peer is gone.
  virtual std::optional<std::string> recv_line(std::chrono::milliseconds timeout) = 0;
};

namespace detail {

inline void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

}  // namespace detail

/// Line transport over a pair of file descriptors (pipe or socket ends).
class FdTransport : public Transport {
 public:
  FdTransport(int read_fd, int write_fd, bool owns = true)
      : rfd_(read_fd), wfd_(write_fd), owns_(owns) {
    detail::ignore_sigpipe_once();
  }

  ~FdTransport() override { close_fds(); }
  FdTransport(const FdTransport&) = delete;
  FdTransport& operator=(const FdTransport&) = delete;

  void send_line(const std::string& line) override {
    std::string msg = line;
    msg.push_back('\n');
    std::size_t off = 0;
    while (off < msg.size()) {
      const ssize_t n = ::write(wfd_, msg.data() + off, msg.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw SessionError("evaluator session: write failed (" + std::string(strerror(errno)) + ")");
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::optional<std::string> recv_line(std::chrono::milliseconds timeout) override {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      const auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return line;
      }
      const auto remain = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (remain.count() <= 0) return std::nullopt;
      struct pollfd pfd{rfd_, POLLIN, 0};
      const int pr = ::poll(&pfd, 1, static_cast<int>(remain.count()));
      if (pr < 0) {
        if (errno == EINTR) continue;
        throw SessionError("evaluator session: poll failed");
      }
      if (pr == 0) return std::nullopt;
      char chunk[4096];
      const ssize_t n = ::read(rfd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw SessionError("evaluator session: read failed (" + std::string(strerror(errno)) + ")");
      }
      if (n == 0) throw SessionError("evaluator session: peer closed the connection");
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 protected:
  void close_fds() {
    if (!owns_) return;
    if (rfd_ >= 0) ::close(rfd_);
    if (wfd_ >= 0 && wfd_ != rfd_) ::close(wfd_);
    rfd_ = wfd_ = -1;
  }

  int rfd_, wfd_;
  bool owns_;
  std::string buf_;
};

/// Child process spoken to over stdin/stdout pipes. The command runs under
/// /bin/sh so the config can carry arguments.
class ProcessTransport : public FdTransport {
 public:
  explicit ProcessTransport(const std::string& command) : FdTransport(-1, -1, true) {
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
      throw SessionError("evaluator session: pipe() failed");
    pid_ = ::fork();
    if (pid_ < 0) throw SessionError("evaluator session: fork() failed");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    rfd_ = from_child[0];
    wfd_ = to_child[1];
  }

  ~ProcessTransport() override {
    close_fds();
    if (pid_ > 0) {
      int status = 0;
      // closing stdin asks the child to finish; nudge it if it lingers
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) != 0) return;
        ::usleep(2000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
  }

 private:
  pid_t pid_ = -1;
};

/// Blocking TCP client connection.
class TcpTransport : public FdTransport {
 public:
  TcpTransport(const std::string& host, const std::string& port) : FdTransport(-1, -1, true) {
    struct addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    struct addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr)
      throw SessionError("evaluator session: cannot resolve " + host + ":" + port);
    int fd = -1;
    for (auto* p = res; p != nullptr; p = p->ai_next) {
      fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw SessionError("evaluator session: cannot connect to " + host + ":" + port);
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    rfd_ = wfd_ = fd;
  }
};

inline constexpr const char* kProtoName = "dots-eval";
inline constexpr int kProtoVersion = 1;

inline std::string handshake_line(std::size_t dims) {
  nlohmann::json j;
  j["proto"] = kProtoName;
  j["version"] = kProtoVersion;
  j["dims"] = dims;
  return j.dump();
}

/// One ask/tell session against an external evaluator. Sends the handshake
/// on construction and expects the evaluator to answer with its own;
/// afterwards requests are matched to responses by id, so replies may
/// arrive out of order. At most `inflight` requests ride the wire at once.
class EvalSession {
 public:
  EvalSession(std::unique_ptr<Transport> transport, std::size_t dims,
              std::chrono::milliseconds timeout, int inflight = 1)
      : t_(std::move(transport)), dims_(dims), timeout_(timeout),
        inflight_(std::max(1, inflight)) {
    t_->send_line(handshake_line(dims_));
    auto line = t_->recv_line(timeout_);
    if (!line) throw EvalError("evaluator did not answer the handshake within the timeout");
    nlohmann::json j = parse(*line);
    if (!j.contains("proto"))
      throw ProtocolError("evaluator did not send a handshake (got: " + *line + ")");
    if (j["proto"] != kProtoName)
      throw ProtocolError("handshake: unexpected protocol name");
    if (!j.contains("version") || j["version"] != kProtoVersion)
      throw ProtocolError("handshake: unsupported protocol version");
    if (!j.contains("dims") || j["dims"].get<std::size_t>() != dims_)
      throw ProtocolError("handshake: evaluator dims do not match the search space");
  }

  double evaluate(const std::vector<double>& x) {
    const std::uint64_t id = send_request(x);
    return await(id);
  }

  /// Pipelined evaluation: results come back in input order.
  std::vector<double> evaluate_many(const std::vector<std::vector<double>>& xs) {
    std::vector<double> out(xs.size());
    std::vector<std::uint64_t> ids(xs.size());
    std::size_t sent = 0, done = 0;
    while (done < xs.size()) {
      while (sent < xs.size() &&
             outstanding_.size() < static_cast<std::size_t>(inflight_)) {
        ids[sent] = send_request(xs[sent]);
        ++sent;
      }
      out[done] = await(ids[done]);
      ++done;
    }
    return out;
  }

  std::uint64_t requests_sent() const { return next_id_ - 1; }

 private:
  static nlohmann::json parse(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw ProtocolError("malformed protocol line: " + line);
    return j;
  }

  std::uint64_t send_request(const std::vector<double>& x) {
    if (x.size() != dims_)
      throw std::invalid_argument("EvalSession: request dimension mismatch");
    const std::uint64_t id = next_id_++;
    nlohmann::json j;
    j["id"] = id;
    j["x"] = x;
    t_->send_line(j.dump());
    outstanding_.insert(id);
    return id;
  }

  double await(std::uint64_t want) {
    while (true) {
      auto parked = parked_.find(want);
      if (parked != parked_.end()) {
        const double y = parked->second;
        parked_.erase(parked);
        return y;
      }
      auto line = t_->recv_line(timeout_);
      if (!line)
        throw EvalError("timeout waiting for response to request " + std::to_string(want));
      nlohmann::json j = parse(*line);
      if (!j.contains("id") || !j["id"].is_number_unsigned())
        throw ProtocolError("response without a valid id: " + *line);
      const auto rid = j["id"].get<std::uint64_t>();
      if (outstanding_.erase(rid) == 0)
        throw ProtocolError("response id " + std::to_string(rid) +
                            " does not match any outstanding request");
      if (j.contains("error"))
        throw EvalError("evaluator error for request " + std::to_string(rid) + ": " +
                        j["error"].get<std::string>());
      if (!j.contains("y") || !j["y"].is_number())
        throw ProtocolError("response " + std::to_string(rid) + " carries no numeric y");
      const double y = j["y"].get<double>();
      if (rid == want) return y;
      parked_.emplace(rid, y);
    }
  }

  std::unique_ptr<Transport> t_;
  std::size_t dims_;
  std::chrono::milliseconds timeout_;
  int inflight_;
  std::uint64_t next_id_ = 1;
  std::unordered_set<std::uint64_t> outstanding_;
  std::unordered_map<std::uint64_t, double> parked_;
};

/// "cmd:<shell command>" or "tcp:<host>:<port>".
inline std::unique_ptr<Transport> open_transport(const std::string& spec) {
  if (spec.rfind("cmd:", 0) == 0) return std::make_unique<ProcessTransport>(spec.substr(4));
  if (spec.rfind("tcp:", 0) == 0) {
    const std::string rest = spec.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("tcp transport needs host:port, got " + spec);
    return std::make_unique<TcpTransport>(rest.substr(0, colon), rest.substr(colon + 1));
  }
  throw std::invalid_argument("transport must start with cmd: or tcp:, got " + spec);
}

struct ExternalConfig {
  std::string transport;  // cmd:... or tcp:host:port
  std::chrono::milliseconds timeout{10000};
  int inflight = 1;
  Direction direction = Direction::minimize;
  std::optional<double> known_best;
};

/// Wrap an external evaluator as an Objective: evaluate sends the lattice
/// realization over the wire and blocks on the matching response.
inline Objective external_objective(const ExternalConfig& ecfg, const SearchSpace& space) {
  auto session = std::make_shared<EvalSession>(open_transport(ecfg.transport), space.dims(),
                                               ecfg.timeout, ecfg.inflight);
  Objective o;
  o.name = "external";
  o.direction = ecfg.direction;
  o.best_value = ecfg.known_best;
  o.evaluate = [session, space](const Point& p) { return session->evaluate(space.realize(p)); };
  return o;
}

/// Evaluator side of the protocol: answer the handshake, then serve
/// requests until the client goes away. Used by the bundled stub tool and
/// by anyone exposing a native objective to an external optimizer.
inline void serve_evaluator(Transport& t,
                            const std::function<double(const std::vector<double>&)>& fn,
                            std::chrono::milliseconds idle_timeout = std::chrono::hours(24)) {
  try {
    auto first = t.recv_line(idle_timeout);
    if (!first) return;
    nlohmann::json hs = nlohmann::json::parse(*first, nullptr, false);
    if (hs.is_discarded() || !hs.is_object() || !hs.contains("proto")) return;
    const auto dims = hs.contains("dims") ? hs["dims"].get<std::size_t>() : 0;
    t.send_line(handshake_line(dims));
    while (auto line = t.recv_line(idle_timeout)) {
      nlohmann::json req = nlohmann::json::parse(*line, nullptr, false);
      nlohmann::json resp;
      if (req.is_discarded() || !req.is_object() || !req.contains("id")) {
        resp["id"] = 0;
        resp["error"] = "malformed request";
      } else {
        resp["id"] = req["id"];
        try {
          const auto x = req.at("x").get<std::vector<double>>();
          if (dims != 0 && x.size() != dims) throw std::invalid_argument("dimension mismatch");
          const double y = fn(x);
          if (std::isfinite(y)) resp["y"] = y;
          else resp["error"] = "non-finite objective value";
        } catch (const std::exception& e) {
          resp["error"] = e.what();
        }
      }
      t.send_line(resp.dump());
    }
  } catch (const SessionError&) {
    // client hung up; a served session simply ends
  }
}

}  // namespace dots
