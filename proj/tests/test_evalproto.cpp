#include <catch2/catch_amalgamated.hpp>

#include <deque>

#include <json.hpp>

#include "dots/driver.hpp"
#include "dots/evalproto.hpp"
#include "support/scripted_evaluator.hpp"

using namespace dots;
using Catch::Approx;

namespace {

using dots::testing::ScriptedEvaluator;

EvalSession make_session(ScriptedEvaluator::Options opt, int inflight = 1,
                         ScriptedEvaluator::Fn fn = nullptr) {
  if (!fn) fn = [](const std::vector<double>& x) { return objectives::rastrigin(x); };
  return EvalSession(std::make_unique<ScriptedEvaluator>(std::move(fn), std::move(opt)),
                     2, std::chrono::milliseconds(200), inflight);
}

std::string stub_command(const std::string& args) {
  return std::string("cmd:") + EVAL_STUB_PATH + " " + args;
}

}  // namespace

TEST_CASE("a request round-trips to the matching response") {
  auto session = make_session({});
  REQUIRE(session.evaluate({0.0, 0.0}) == 0.0);
  REQUIRE(session.evaluate({1.0, 0.0}) == Approx(1.0).margin(1e-9));
  REQUIRE(session.requests_sent() == 2);
}

TEST_CASE("out-of-order responses reach the right callers") {
  ScriptedEvaluator::Options opt;
  opt.lifo = true;  // id 2 comes back before id 1
  auto session = make_session(opt, /*inflight=*/2,
                              [](const std::vector<double>& x) { return x[0] * 10.0; });
  auto out = session.evaluate_many({{1.0, 0.0}, {2.0, 0.0}});
  REQUIRE(out[0] == 10.0);
  REQUIRE(out[1] == 20.0);
}

TEST_CASE("evaluator-reported errors surface with their request id") {
  ScriptedEvaluator::Options opt;
  opt.responder = [](const nlohmann::json& req) {
    nlohmann::json r;
    r["id"] = req["id"];
    r["error"] = "nan";
    return r;
  };
  auto session = make_session(opt);
  REQUIRE_THROWS_WITH(session.evaluate({0.0, 0.0}),
                      Catch::Matchers::ContainsSubstring("nan") &&
                          Catch::Matchers::ContainsSubstring("request 1"));
}

TEST_CASE("protocol violations are named") {
  SECTION("response with an unknown id") {
    ScriptedEvaluator::Options opt;
    opt.responder = [](const nlohmann::json& req) {
      nlohmann::json r;
      r["id"] = req["id"].get<std::uint64_t>() + 41;
      r["y"] = 0.0;
      return r;
    };
    auto session = make_session(opt);
    REQUIRE_THROWS_AS(session.evaluate({0.0, 0.0}), ProtocolError);
  }
  SECTION("malformed line") {
    ScriptedEvaluator::Options opt;
    opt.responder = [](const nlohmann::json&) { return nlohmann::json("not an object"); };
    auto session = make_session(opt);
    REQUIRE_THROWS_AS(session.evaluate({0.0, 0.0}), ProtocolError);
  }
  SECTION("response without y") {
    ScriptedEvaluator::Options opt;
    opt.responder = [](const nlohmann::json& req) {
      nlohmann::json r;
      r["id"] = req["id"];
      return r;
    };
    auto session = make_session(opt);
    REQUIRE_THROWS_AS(session.evaluate({0.0, 0.0}), ProtocolError);
  }
  SECTION("evaluator answering requests without a handshake") {
    ScriptedEvaluator::Options opt;
    opt.handshake_response = R"({"id":99,"y":1.0})";
    REQUIRE_THROWS_AS(make_session(opt), ProtocolError);
  }
  SECTION("handshake dims mismatch") {
    ScriptedEvaluator::Options opt;
    opt.handshake_response = handshake_line(3);  // session expects 2
    REQUIRE_THROWS_AS(make_session(opt), ProtocolError);
  }
}

TEST_CASE("timeouts surface as evaluation errors") {
  ScriptedEvaluator::Options opt;
  opt.ack_handshake = false;  // never say anything
  REQUIRE_THROWS_AS(make_session(opt), EvalError);
}

TEST_CASE("request dimension mismatch is rejected locally") {
  auto session = make_session({});
  REQUIRE_THROWS_AS(session.evaluate({1.0}), std::invalid_argument);
}

TEST_CASE("10k randomized-latency exchanges lose and duplicate nothing") {
  ScriptedEvaluator::Options opt;
  opt.shuffle = true;
  opt.seed = 2024;
  auto session = make_session(opt, /*inflight=*/8,
                              [](const std::vector<double>& x) { return x[0]; });
  std::vector<std::vector<double>> xs;
  xs.reserve(10000);
  for (int i = 0; i < 10000; ++i) xs.push_back({static_cast<double>(i), 0.0});
  const auto out = session.evaluate_many(xs);
  REQUIRE(out.size() == 10000);
  for (int i = 0; i < 10000; ++i) REQUIRE(out[static_cast<std::size_t>(i)] == i);
  REQUIRE(session.requests_sent() == 10000);
}

TEST_CASE("subprocess stub serves benchmark values over pipes") {
  auto space = SearchSpace::uniform(2, -5.0, 5.0, 0.1);
  ExternalConfig ec;
  ec.transport = stub_command("--fn rastrigin");
  Objective obj = external_objective(ec, space);
  const Point origin = space.snap({0.0, 0.0});
  REQUIRE(obj.evaluate(origin) == objectives::rastrigin(space.realize(origin)));
  const Point p = space.snap({1.0, -0.5});
  REQUIRE(obj.evaluate(p) == objectives::rastrigin(space.realize(p)));  // bitwise
}

TEST_CASE("transport transparency: external run is bit-identical to in-process") {
  auto space = SearchSpace::uniform(3, -5.0, 5.0, 0.1);
  RunConfig cfg;
  cfg.scenario = Scenario::exact;
  cfg.init_points = 60;
  cfg.eval_budget = 600;
  cfg.rounds = 4;
  cfg.chains = 2;
  cfg.search.rollouts = 40;
  cfg.seed = 33;

  Objective local = make_rastrigin(space);
  auto in_process = run_exact(local, space, {}, cfg);

  ExternalConfig ec;
  ec.transport = stub_command("--fn rastrigin");
  ec.known_best = 0.0;
  Objective remote = external_objective(ec, space);
  auto external = run_exact(remote, space, {}, cfg);

  REQUIRE(history_csv(in_process) == history_csv(external));
  REQUIRE(in_process.best_point == external.best_point);
  REQUIRE(in_process.total_evals == external.total_evals);
  REQUIRE(in_process.status == external.status);
}
