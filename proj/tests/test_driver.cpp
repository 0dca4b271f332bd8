#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dots/driver.hpp"

using namespace dots;
using Catch::Approx;

namespace {

RunConfig fast_exact_cfg(std::uint64_t seed) {
  RunConfig cfg;
  cfg.scenario = Scenario::exact;
  cfg.init_points = 50;
  cfg.eval_budget = 4000;
  cfg.rounds = 50;
  cfg.chains = 3;
  cfg.search.rollouts = 50;
  cfg.seed = seed;
  return cfg;
}

long total_round_evals(const RunHistory& h) {
  long s = 0;
  for (const auto& r : h.rounds) s += r.evals;
  return s;
}

void check_monotone(const RunHistory& h, bool minimize) {
  for (std::size_t i = 1; i < h.rounds.size(); ++i) {
    if (minimize) REQUIRE(h.rounds[i].best_value <= h.rounds[i - 1].best_value);
    else REQUIRE(h.rounds[i].best_value >= h.rounds[i - 1].best_value);
  }
}

}  // namespace

TEST_CASE("budget equal to init_points returns after initialization") {
  auto space = SearchSpace::uniform(2, -5.0, 5.0, 0.1);
  auto obj = make_rastrigin(space);
  RunConfig cfg = fast_exact_cfg(1);
  cfg.init_points = 40;
  cfg.eval_budget = 40;
  auto h = run_exact(obj, space, {}, cfg);
  REQUIRE(h.rounds.size() == 1);
  REQUIRE(h.rounds[0].round == 0);
  REQUIRE(h.total_evals == 40);
}

TEST_CASE("exact-oracle DOTS converges on rastrigin-2d and accounts evaluations") {
  auto space = SearchSpace::uniform(2, -5.0, 5.0, 0.1);
  auto obj = make_rastrigin(space);
  for (std::uint64_t seed : {0ull, 1ull, 2ull}) {
    auto h = run_exact(obj, space, {}, fast_exact_cfg(seed));
    REQUIRE(h.status == RunHistory::Status::converged);
    REQUIRE(h.best_value <= 1e-9);
    REQUIRE(h.best_point == *obj.best_point);  // the exact lattice optimum
    REQUIRE(total_round_evals(h) == h.total_evals);
    REQUIRE(h.total_evals <= 4000);
    check_monotone(h, true);
  }
}

TEST_CASE("exact scenario is deterministic end to end") {
  auto space = SearchSpace::uniform(3, -5.0, 5.0, 0.1);
  auto obj = make_ackley(space);
  RunConfig cfg = fast_exact_cfg(9);
  cfg.eval_budget = 1500;
  auto a = run_exact(obj, space, {}, cfg);
  auto b = run_exact(obj, space, {}, cfg);
  REQUIRE(history_csv(a) == history_csv(b));
  REQUIRE(a.best_point == b.best_point);
}

TEST_CASE("minimizing f equals maximizing -f (negation duality)") {
  auto space = SearchSpace::uniform(3, -5.0, 5.0, 0.1);
  Objective down = make_rastrigin(space);
  down.best_value.reset();  // run both to the same fixed budget

  Objective up;
  up.name = "neg-rastrigin";
  up.direction = Direction::maximize;
  up.evaluate = [inner = down.evaluate](const Point& p) { return -inner(p); };

  RunConfig cfg = fast_exact_cfg(21);
  cfg.eval_budget = 900;
  cfg.rounds = 6;
  auto ha = run_exact(down, space, {}, cfg);
  auto hb = run_exact(up, space, {}, cfg);

  REQUIRE(ha.rounds.size() == hb.rounds.size());
  for (std::size_t i = 0; i < ha.rounds.size(); ++i) {
    REQUIRE(ha.rounds[i].evals == hb.rounds[i].evals);
    REQUIRE(ha.rounds[i].best_point == hb.rounds[i].best_point);
    REQUIRE(ha.rounds[i].best_value == -hb.rounds[i].best_value);
    if (i > 0) REQUIRE(ha.rounds[i].c_eff == hb.rounds[i].c_eff);
  }
  REQUIRE(ha.best_point == hb.best_point);
}

TEST_CASE("random search baseline spends exactly its budget") {
  auto space = SearchSpace::uniform(5, -5.0, 5.0, 0.1);
  Objective obj = make_rastrigin(space);
  obj.best_value.reset();  // 5-d lattice: the optimum will not be drawn
  RunConfig cfg;
  cfg.init_points = 1;
  cfg.batch = 32;
  cfg.eval_budget = 500;
  cfg.seed = 4;
  auto h = random_search_baseline(obj, space, cfg);
  REQUIRE(h.total_evals == 500);
  REQUIRE(total_round_evals(h) == 500);
  REQUIRE(h.status == RunHistory::Status::budget_exhausted);
  check_monotone(h, true);

  auto h2 = random_search_baseline(obj, space, cfg);
  REQUIRE(history_csv(h) == history_csv(h2));
}

TEST_CASE("convergence ratio arithmetic") {
  auto mk = [](double best) {
    RunHistory h;
    h.best_value = best;
    return h;
  };
  std::vector<RunHistory> hs = {mk(0.0), mk(1e-12), mk(0.5), mk(1e-10), mk(-1e-11)};
  REQUIRE(convergence_ratio(hs, 0.0, 1e-9) == Approx(0.8).margin(1e-15));
  REQUIRE(convergence_ratio({mk(3.0), mk(2.0)}, 0.0, 1e-9) == 0.0);
  REQUIRE(convergence_ratio({mk(0.0), mk(0.0)}, 0.0, 1e-9) == 1.0);
  REQUIRE_THROWS_AS(convergence_ratio({}, 0.0, 1e-9), std::invalid_argument);
}

TEST_CASE("surrogate scenario runs rounds, logs fit quality and accounts the budget") {
  auto space = SearchSpace::uniform(3, -5.0, 5.0, 0.1);
  auto obj = make_ackley(space);
  RunConfig cfg;
  cfg.scenario = Scenario::surrogate;
  cfg.init_points = 30;
  cfg.batch = 6;
  cfg.rounds = 3;
  cfg.eval_budget = 48;
  cfg.chains = 2;
  cfg.search.rollouts = 30;
  cfg.regressor.hidden = {16, 16};
  cfg.regressor.epochs = 40;
  cfg.seed = 5;

  auto h = run_surrogate(obj, space, {}, cfg);
  REQUIRE(total_round_evals(h) == h.total_evals);
  REQUIRE(h.total_evals <= 48);
  check_monotone(h, true);
  if (h.status == RunHistory::Status::budget_exhausted) {
    REQUIRE(h.rounds.size() == 4);  // init + 3 completed rounds
  }
  for (std::size_t i = 1; i < h.rounds.size(); ++i) {
    REQUIRE(std::isfinite(h.rounds[i].c_eff));
    REQUIRE(std::isfinite(h.rounds[i].r2));  // holdout of 3 with spread labels
  }

  auto h2 = run_surrogate(obj, space, {}, cfg);
  REQUIRE(history_csv(h) == history_csv(h2));
}

TEST_CASE("history CSV schema") {
  auto space = SearchSpace::uniform(2, -5.0, 5.0, 0.1);
  auto obj = make_rastrigin(space);
  RunConfig cfg = fast_exact_cfg(2);
  cfg.eval_budget = 300;
  auto h = run_exact(obj, space, {}, cfg);
  const std::string csv = history_csv(h);
  REQUIRE(csv.rfind("round,evals_cum,best_value,c_eff,r2\n", 0) == 0);
  // one line per round entry plus header
  const auto lines = std::count(csv.begin(), csv.end(), '\n');
  REQUIRE(lines == static_cast<long>(h.rounds.size()) + 1);
}

TEST_CASE("infeasible space surfaces as an error") {
  auto space = SearchSpace::uniform(2, -5.0, 5.0, 0.1);
  auto obj = make_rastrigin(space);
  ConstraintSet impossible;
  impossible.add([](const Point&) { return false; });
  REQUIRE_THROWS_AS(run_exact(obj, space, impossible, fast_exact_cfg(0)), InfeasibleError);
}

TEST_CASE("constrained runs only ever evaluate feasible points") {
  auto space = SearchSpace::uniform(2, -5.0, 5.0, 0.1);
  ConstraintSet cs;
  cs.add([](const Point& p) { return p.ix[0] >= 50; });
  Objective obj = make_rastrigin(space);
  obj.best_value.reset();
  Objective checked = obj;
  checked.evaluate = [&cs, inner = obj.evaluate](const Point& p) {
    REQUIRE(cs.ok(p));
    return inner(p);
  };
  RunConfig cfg = fast_exact_cfg(6);
  cfg.eval_budget = 600;
  cfg.rounds = 5;
  auto h = run_exact(checked, space, cs, cfg);
  REQUIRE(h.total_evals > 0);
  REQUIRE(h.best_point.ix[0] >= 50);
}
