#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "dots/objective.hpp"
#include "dots/rng.hpp"

using namespace dots;
using Catch::Approx;

namespace {

// independent grid-refinement oracle for the michalewicz d=2 minimum
double michalewicz2_grid_min() {
  double lo1 = 0.0, hi1 = std::numbers::pi, lo2 = 0.0, hi2 = std::numbers::pi;
  double best = 1e300, bx = 0.0, by = 0.0;
  for (int pass = 0; pass < 5; ++pass) {
    const int n = 160;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const double x = lo1 + (hi1 - lo1) * i / n;
        const double y = lo2 + (hi2 - lo2) * j / n;
        const double v = objectives::michalewicz(std::vector<double>{x, y});
        if (v < best) {
          best = v;
          bx = x;
          by = y;
        }
      }
    }
    const double w1 = (hi1 - lo1) / n * 3, w2 = (hi2 - lo2) / n * 3;
    lo1 = std::max(0.0, bx - w1);
    hi1 = std::min(std::numbers::pi, bx + w1);
    lo2 = std::max(0.0, by - w2);
    hi2 = std::min(std::numbers::pi, by + w2);
  }
  return best;
}

}  // namespace

TEST_CASE("ackley values") {
  REQUIRE(objectives::ackley(std::vector<double>{0.0}) == Approx(0.0).margin(1e-12));
  REQUIRE(objectives::ackley(std::vector<double>(7, 0.0)) == Approx(0.0).margin(1e-12));

  // d=2 at (1,1): the radial term and the cosine term collapse to
  // 20 - 20 exp(-0.2)
  const double expected = -20.0 * std::exp(-0.2) - std::numbers::e + 20.0 + std::numbers::e;
  REQUIRE(objectives::ackley(std::vector<double>{1.0, 1.0}) == Approx(expected).margin(1e-12));
  REQUIRE(objectives::ackley(std::vector<double>{1.0, 1.0}) == Approx(3.62538).margin(1e-5));

  REQUIRE(objectives::ackley(std::vector<double>{-1.0}) ==
          Approx(objectives::ackley(std::vector<double>{1.0})).margin(1e-12));
}

TEST_CASE("rosenbrock values") {
  REQUIRE(objectives::rosenbrock(std::vector<double>(2, 1.0)) == 0.0);
  REQUIRE(objectives::rosenbrock(std::vector<double>(9, 1.0)) == 0.0);
  REQUIRE(objectives::rosenbrock(std::vector<double>{0.0, 0.0}) == Approx(1.0).margin(1e-12));
  // direct arithmetic: 100*(1.2 - 1.1^2)^2 + (1.1 - 1)^2 = 0.01 + 0.01
  REQUIRE(objectives::rosenbrock(std::vector<double>{1.1, 1.2}) == Approx(0.02).margin(1e-12));
  REQUIRE_THROWS_AS(objectives::rosenbrock(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("rastrigin values") {
  REQUIRE(objectives::rastrigin(std::vector<double>(4, 0.0)) == Approx(0.0).margin(1e-12));
  REQUIRE(objectives::rastrigin(std::vector<double>{1.0}) == Approx(1.0).margin(1e-9));
  REQUIRE(objectives::rastrigin(std::vector<double>{0.5, 0.0}) == Approx(20.25).margin(1e-9));
}

TEST_CASE("griewank, schwefel, michalewicz standard forms") {
  REQUIRE(objectives::griewank(std::vector<double>(6, 0.0)) == Approx(0.0).margin(1e-12));
  REQUIRE(objectives::schwefel(std::vector<double>{420.968746}) == Approx(0.0).margin(1e-3));

  const double oracle = michalewicz2_grid_min();
  REQUIRE(oracle == Approx(-1.8013).margin(1e-3));
  const double at_published =
      objectives::michalewicz(std::vector<double>{2.20290552014618, 1.57079632677565});
  REQUIRE(at_published == Approx(oracle).margin(1e-6));
}

TEST_CASE("benchmarks at their known optimizers") {
  auto space = SearchSpace::uniform(5, -5.0, 5.0, 0.1);
  for (const char* name : {"ackley", "rosenbrock", "rastrigin", "griewank"}) {
    Objective o = make_benchmark(name, space);
    REQUIRE(o.best_value.has_value());
    REQUIRE(o.best_point.has_value());
    REQUIRE(o.evaluate(*o.best_point) == Approx(*o.best_value).margin(1e-9));
  }
  // schwefel's irrational optimizer needs a fine lattice and a looser bar
  auto fine = SearchSpace::uniform(2, -500.0, 500.0, 1e-4);
  Objective sw = make_schwefel(fine);
  REQUIRE(sw.best_point.has_value());
  REQUIRE(sw.evaluate(*sw.best_point) == Approx(0.0).margin(1e-3));

  auto mich_space = SearchSpace::uniform(2, 0.0, std::numbers::pi, 1e-4);
  Objective mich = make_michalewicz(mich_space);
  REQUIRE(mich.best_point.has_value());
  REQUIRE(mich.evaluate(*mich.best_point) == Approx(-1.80130341).margin(1e-4));
}

TEST_CASE("no random lattice point beats the claimed optimum") {
  Rng rng(17);
  ConstraintSet none;

  auto box = SearchSpace::uniform(5, -5.0, 5.0, 0.1);
  for (const char* name : {"ackley", "rosenbrock", "rastrigin", "griewank"}) {
    Objective o = make_benchmark(name, box);
    for (int t = 0; t < 10000; ++t)
      REQUIRE(o.evaluate(random_point(box, none, rng)) >= *o.best_value - 1e-9);
  }

  auto sw_box = SearchSpace::uniform(3, -500.0, 500.0, 0.5);
  Objective sw = make_schwefel(sw_box);
  for (int t = 0; t < 10000; ++t)
    REQUIRE(sw.evaluate(random_point(sw_box, none, rng)) >= -1e-9);

  auto mich_box = SearchSpace::uniform(2, 0.0, std::numbers::pi, 0.01);
  Objective mich = make_michalewicz(mich_box);
  for (int t = 0; t < 10000; ++t)
    REQUIRE(mich.evaluate(random_point(mich_box, none, rng)) >= *mich.best_value - 1e-5);
}

TEST_CASE("ackley and rastrigin are permutation invariant") {
  // griewank is deliberately absent: its cos(x_i/sqrt(i)) product ties each
  // coordinate to its index
  Rng rng(23);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(6);
    for (auto& v : x) v = rng.uniform(-5.0, 5.0);
    std::vector<double> shuffled = x;
    rng.shuffle(shuffled);
    REQUIRE(objectives::ackley(x) == Approx(objectives::ackley(shuffled)).margin(1e-10));
    REQUIRE(objectives::rastrigin(x) == Approx(objectives::rastrigin(shuffled)).margin(1e-10));
  }
}

TEST_CASE("product objective") {
  auto space = SearchSpace::uniform(2, -5.0, 5.0, 0.1);
  auto constant = [](std::string name, double v) {
    Objective o;
    o.name = std::move(name);
    o.evaluate = [v](const Point&) { return v; };
    return o;
  };
  const Point at{{0, 0}};

  SECTION("single component is the identity") {
    Objective base = make_rastrigin(space);
    Objective p = product({base});
    const Point q{{10, 60}};
    REQUIRE(p.evaluate(q) == base.evaluate(q));
  }
  SECTION("componentwise multiplication and the zero annihilator") {
    REQUIRE(product({constant("a", 2.0), constant("b", 3.0)}).evaluate(at) == 6.0);
    REQUIRE(product({constant("a", 0.0), constant("b", 3.0)}).evaluate(at) == 0.0);
  }
  SECTION("errors") {
    REQUIRE_THROWS_AS(product({}), std::invalid_argument);
    Objective down = constant("down", 1.0);
    Objective up = constant("up", 1.0);
    up.direction = Direction::maximize;
    REQUIRE_THROWS_AS(product({down, up}), std::invalid_argument);
  }
}
