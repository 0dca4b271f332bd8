#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dots/space.hpp"

namespace dots {

enum class Direction { minimize, maximize };

/// A ground-truth target: deterministic value function over lattice points,
/// an optimization direction, and (for benchmarks) the known optimum.
struct Objective {
  std::string name;
  Direction direction = Direction::minimize;
  std::function<double(const Point&)> evaluate;
  std::optional<double> best_value;  // known optimum value, if any
  std::optional<Point> best_point;   // on-lattice optimizer, when representable
};

namespace objectives {

inline double ackley(std::span<const double> x) {
  const double a = 20.0, b = 0.2, c = 2.0 * std::numbers::pi;
  const double d = static_cast<double>(x.size());
  double sq = 0.0, co = 0.0;
  for (double v : x) {
    sq += v * v;
    co += std::cos(c * v);
  }
  return -a * std::exp(-b * std::sqrt(sq / d)) - std::exp(co / d) + a + std::numbers::e;
}

inline double rosenbrock(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("rosenbrock: needs at least 2 dimensions");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double t = x[i + 1] - x[i] * x[i];
    s += 100.0 * t * t + (x[i] - 1.0) * (x[i] - 1.0);
  }
  return s;
}

inline double rastrigin(std::span<const double> x) {
  double s = 10.0 * static_cast<double>(x.size());
  for (double v : x) s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
  return s;
}

inline double griewank(std::span<const double> x) {
  double sum = 0.0, prod = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum += x[i] * x[i] / 4000.0;
    prod *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
  }
  return sum - prod + 1.0;
}

inline double schwefel(std::span<const double> x) {
  double s = 418.9829 * static_cast<double>(x.size());
  for (double v : x) s -= v * std::sin(std::sqrt(std::abs(v)));
  return s;
}

/// Steepness parameter m fixed at 10; domain conventionally [0, pi].
inline double michalewicz(std::span<const double> x) {
  constexpr int m = 10;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double si = std::sin(static_cast<double>(i + 1) * x[i] * x[i] / std::numbers::pi);
    s -= std::sin(x[i]) * std::pow(si, 2 * m);
  }
  return s;
}

}  // namespace objectives

namespace detail {

/// Snap an ideal optimizer onto the lattice; accept only if the snapped
/// point is a genuine neighbor (the optimizer lies inside the box).
inline std::optional<Point> snap_optimizer(const SearchSpace& space,
                                           const std::vector<double>& xopt) {
  Point p = space.snap(xopt);
  const auto x = space.realize(p);
  for (std::size_t d = 0; d < x.size(); ++d)
    if (std::abs(x[d] - xopt[d]) > space.step(d) / 2.0 + 1e-9) return std::nullopt;
  return p;
}

inline Objective make_real_objective(std::string name, const SearchSpace& space,
                                     double (*fn)(std::span<const double>)) {
  Objective o;
  o.name = std::move(name);
  o.direction = Direction::minimize;
  o.evaluate = [space, fn](const Point& p) { return fn(space.realize(p)); };
  return o;
}

}  // namespace detail

inline Objective make_ackley(const SearchSpace& space) {
  Objective o = detail::make_real_objective("ackley", space, objectives::ackley);
  o.best_value = 0.0;
  o.best_point = detail::snap_optimizer(space, std::vector<double>(space.dims(), 0.0));
  return o;
}

inline Objective make_rosenbrock(const SearchSpace& space) {
  if (space.dims() < 2) throw std::invalid_argument("rosenbrock: needs at least 2 dimensions");
  Objective o = detail::make_real_objective("rosenbrock", space, objectives::rosenbrock);
  o.best_value = 0.0;
  o.best_point = detail::snap_optimizer(space, std::vector<double>(space.dims(), 1.0));
  return o;
}

inline Objective make_rastrigin(const SearchSpace& space) {
  Objective o = detail::make_real_objective("rastrigin", space, objectives::rastrigin);
  o.best_value = 0.0;
  o.best_point = detail::snap_optimizer(space, std::vector<double>(space.dims(), 0.0));
  return o;
}

inline Objective make_griewank(const SearchSpace& space) {
  Objective o = detail::make_real_objective("griewank", space, objectives::griewank);
  o.best_value = 0.0;
  o.best_point = detail::snap_optimizer(space, std::vector<double>(space.dims(), 0.0));
  return o;
}

inline Objective make_schwefel(const SearchSpace& space) {
  Objective o = detail::make_real_objective("schwefel", space, objectives::schwefel);
  o.best_value = 0.0;  // 418.9829*d normalization makes the minimum ~0
  o.best_point = detail::snap_optimizer(space, std::vector<double>(space.dims(), 420.968746));
  return o;
}

inline Objective make_michalewicz(const SearchSpace& space) {
  Objective o = detail::make_real_objective("michalewicz", space, objectives::michalewicz);
  switch (space.dims()) {
    case 2:
      o.best_value = -1.80130341;
      o.best_point = detail::snap_optimizer(space, {2.20290552014618, 1.57079632677565});
      break;
    case 5: o.best_value = -4.687658; break;
    case 10: o.best_value = -9.66015; break;
    default: break;  // literature value not tabulated
  }
  return o;
}

/// Factory keyed by the config-file objective name.
inline Objective make_benchmark(const std::string& name, const SearchSpace& space) {
  if (name == "ackley") return make_ackley(space);
  if (name == "rosenbrock") return make_rosenbrock(space);
  if (name == "rastrigin") return make_rastrigin(space);
  if (name == "griewank") return make_griewank(space);
  if (name == "schwefel") return make_schwefel(space);
  if (name == "michalewicz") return make_michalewicz(space);
  throw std::invalid_argument("unknown benchmark objective: " + name);
}

/// Multi-objective targets collapse to the product of component values.
/// Components must share one search space and one direction.
inline Objective product(std::vector<Objective> components) {
  if (components.empty()) throw std::invalid_argument("product: needs at least one component");
  const Direction dir = components.front().direction;
  for (const auto& c : components)
    if (c.direction != dir) throw std::invalid_argument("product: mixed directions");
  Objective o;
  o.name = "product(";
  for (std::size_t i = 0; i < components.size(); ++i)
    o.name += (i ? "," : "") + components[i].name;
  o.name += ")";
  o.direction = dir;
  o.evaluate = [cs = std::move(components)](const Point& p) {
    double v = 1.0;
    for (const auto& c : cs) v *= c.evaluate(p);
    return v;
  };
  return o;
}

}  // namespace dots
