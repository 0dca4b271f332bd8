// Reference evaluator for the dots-eval v1 protocol. Serves a named
// benchmark function over stdio (or one TCP connection), so it doubles as
// a worked example of plugging an external simulator into the optimizer.
// The --misbehave modes exist to exercise check-evaluator failure paths.

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dots/evalproto.hpp"
#include "dots/objective.hpp"

namespace {

double dispatch(const std::string& fn, const std::vector<double>& x) {
  using namespace dots::objectives;
  if (fn == "ackley") return ackley(x);
  if (fn == "rosenbrock") return rosenbrock(x);
  if (fn == "rastrigin") return rastrigin(x);
  if (fn == "griewank") return griewank(x);
  if (fn == "schwefel") return schwefel(x);
  if (fn == "michalewicz") return michalewicz(x);
  throw std::invalid_argument("unknown function: " + fn);
}

// Deliberately broken servers for conformance testing.
void serve_misbehaving(dots::Transport& t, const std::string& mode, const std::string& fn) {
  const auto forever = std::chrono::hours(24);
  auto first = t.recv_line(forever);
  if (!first) return;
  if (mode == "silent") {
    while (t.recv_line(forever)) {
    }
    return;
  }
  if (mode != "no-handshake") t.send_line(dots::handshake_line(2));
  while (auto line = t.recv_line(forever)) {
    nlohmann::json req = nlohmann::json::parse(*line, nullptr, false);
    if (req.is_discarded() || !req.contains("id")) continue;
    nlohmann::json resp;
    auto id = req["id"].get<std::uint64_t>();
    resp["id"] = (mode == "wrong-id") ? id + 1 : id;
    try {
      resp["y"] = dispatch(fn, req.at("x").get<std::vector<double>>());
    } catch (const std::exception& e) {
      resp["error"] = e.what();
    }
    t.send_line(resp.dump());
  }
}

int listen_once(int port) {
  const int srv = ::socket(AF_INET, SOCK_STREAM, 0);
  if (srv < 0) return -1;
  int one = 1;
  ::setsockopt(srv, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<uint16_t>(port));
  if (::bind(srv, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(srv, 1) != 0) {
    ::close(srv);
    return -1;
  }
  std::cerr << "listening on 127.0.0.1:" << port << std::endl;
  const int conn = ::accept(srv, nullptr, nullptr);
  ::close(srv);
  return conn;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dots-eval v1 reference evaluator"};
  std::string fn = "rastrigin";
  std::string misbehave = "none";
  int port = 0;
  app.add_option("--fn", fn, "benchmark function to serve");
  app.add_option("--listen", port, "serve one TCP connection on this port instead of stdio");
  app.add_option("--misbehave", misbehave, "none|no-handshake|wrong-id|silent")
      ->check(CLI::IsMember({"none", "no-handshake", "wrong-id", "silent"}));
  CLI11_PARSE(app, argc, argv);

  std::unique_ptr<dots::FdTransport> t;
  if (port > 0) {
    const int conn = listen_once(port);
    if (conn < 0) {
      std::cerr << "cannot listen on port " << port << std::endl;
      return 1;
    }
    t = std::make_unique<dots::FdTransport>(conn, conn);
  } else {
    t = std::make_unique<dots::FdTransport>(STDIN_FILENO, STDOUT_FILENO, /*owns=*/false);
  }

  try {
    if (misbehave == "none") {
      dots::serve_evaluator(*t, [&fn](const std::vector<double>& x) { return dispatch(fn, x); });
    } else {
      serve_misbehaving(*t, misbehave, fn);
    }
  } catch (const std::exception& e) {
    std::cerr << "evaluator error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
