#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dots/rng.hpp"
#include "dots/space.hpp"

namespace dots {

/// Visit counts are the tree's only persistent search state; node values
/// are never backpropagated. Absent key means zero visits.
class VisitTable {
 public:
  int count(const Point& p) const {
    auto it = counts_.find(p);
    return it == counts_.end() ? 0 : it->second;
  }

  void increment(const Point& p) { ++counts_[p]; }

  std::size_t size() const { return counts_.size(); }
  const std::unordered_map<Point, int, PointHash>& entries() const { return counts_; }

 private:
  std::unordered_map<Point, int, PointHash> counts_;
};

struct DucbParams {
  double c0 = 0.5;         // exploration constant, paper range 0.1..1
  int rollouts = 100;      // rollouts per search phase
  double mutation_lo = 0.1;  // scaled-mutation fraction range, as a share
  double mutation_hi = 0.5;  // of the dimension count (at least 1 coord)

  /// Set to bypass the adaptive weight: fixed c0 for the no-adaptive-weight
  /// ablation, 0 for pure greedy selection.
  std::optional<double> exploration_override;

  /// Cleared for the no-local-backprop ablation; visit counts then stay at
  /// zero and selection degenerates to greedy descent.
  bool local_backprop = true;

  void validate() const {
    if (!(c0 > 0.0)) throw std::invalid_argument("DucbParams: c0 must be positive");
    if (rollouts < 1) throw std::invalid_argument("DucbParams: rollouts must be >= 1");
    if (!(mutation_lo > 0.0 && mutation_lo <= mutation_hi && mutation_hi <= 1.0))
      throw std::invalid_argument("DucbParams: mutation fraction range must satisfy 0 < lo <= hi <= 1");
  }
};

struct NodeStat {
  double value = 0.0;  // value_fn output, maximization frame
  int visits = 0;      // final visit count snapshot
};

/// Everything one search phase saw: every evaluated point with its value
/// and final visit count, plus the sequence of accepted roots.
struct RolloutRecord {
  std::unordered_map<Point, NodeStat, PointHash> visited;
  std::vector<Point> trajectory;  // start point, then each accepted root
};

/// Exploration weight c(rho) = c0 * max(|min(labels)|, eps). Labels are
/// expected in the minimization frame (best = min); the absolute value
/// keeps the weight commensurate with the label scale once labels go
/// negative, and the floor keeps DUCB finite when the best label is 0.
inline double adaptive_weight(double c0, const std::vector<double>& labels) {
  if (labels.empty()) throw std::invalid_argument("adaptive_weight: empty labels");
  const double m = *std::min_element(labels.begin(), labels.end());
  return c0 * std::max(std::abs(m), 1e-6);
}

/// Dynamic UCB, maximization orientation. The +1 in the denominator keeps
/// unvisited nodes finite so a whole expansion can be compared at once.
inline double ducb(double value, int n_node, int n_root_total, double c_eff) {
  if (n_root_total < 1) throw std::invalid_argument("ducb: root visit total must be >= 1");
  return value + c_eff * std::sqrt(2.0 * std::log(static_cast<double>(n_root_total)) /
                                   (static_cast<double>(n_node) + 1.0));
}

namespace detail {

// One-step move: one coordinate +/- one lattice step, sign uniform among
// in-bounds options.
inline Point one_step_move(const Point& root, const SearchSpace& space, Rng& rng) {
  Point p = root;
  const auto d = static_cast<std::size_t>(rng.below(space.dims()));
  const std::int64_t last = space.lattice_size(d) - 1;
  int dir;
  if (p.ix[d] == 0) dir = +1;
  else if (p.ix[d] == last) dir = -1;
  else dir = rng.coin() ? +1 : -1;
  p.ix[d] += dir;
  return p;
}

// Single mutation: one coordinate jumps to a uniform lattice value != current.
inline Point single_mutation(const Point& root, const SearchSpace& space, Rng& rng) {
  Point p = root;
  const auto d = static_cast<std::size_t>(rng.below(space.dims()));
  const auto size = static_cast<std::uint64_t>(space.lattice_size(d));
  auto v = static_cast<std::int32_t>(rng.below(size - 1));
  if (v >= p.ix[d]) ++v;
  p.ix[d] = v;
  return p;
}

// Scaled random mutation: a random fraction of coordinates resample to
// uniform lattice values.
inline Point scaled_mutation(const Point& root, const SearchSpace& space,
                             double frac_lo, double frac_hi, Rng& rng) {
  Point p = root;
  const std::size_t dims = space.dims();
  const double frac = rng.uniform(frac_lo, frac_hi);
  auto k = static_cast<std::size_t>(std::lround(frac * static_cast<double>(dims)));
  k = std::clamp<std::size_t>(k, 1, dims);
  // partial Fisher-Yates picks k distinct coordinates
  std::vector<std::size_t> order(dims);
  for (std::size_t i = 0; i < dims; ++i) order[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(dims - i));
    std::swap(order[i], order[j]);
    const std::size_t d = order[i];
    p.ix[d] = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(space.lattice_size(d))));
  }
  return p;
}

inline Point random_action(const Point& root, const SearchSpace& space,
                           const DucbParams& params, Rng& rng) {
  switch (rng.below(3)) {
    case 0: return one_step_move(root, space, rng);
    case 1: return single_mutation(root, space, rng);
    default: return scaled_mutation(root, space, params.mutation_lo, params.mutation_hi, rng);
  }
}

}  // namespace detail

/// Generate exactly dims children of the root, each by an action mode drawn
/// uniformly from {one-step move, single mutation, scaled random mutation}.
/// Children violating the constraints are re-drawn (budget 100 per child),
/// then fall back to a one-step move, then to the root itself as sentinel.
inline std::vector<Point> stochastic_expansion(const Point& root, const SearchSpace& space,
                                               const ConstraintSet& constraints,
                                               const DucbParams& params, Rng& rng) {
  space.check_dims(root.ix.size());
  std::vector<Point> children;
  children.reserve(space.dims());
  for (std::size_t c = 0; c < space.dims(); ++c) {
    Point child;
    bool ok = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      child = detail::random_action(root, space, params, rng);
      if (constraints.ok(child)) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      child = detail::one_step_move(root, space, rng);
      if (!constraints.ok(child)) child = root;  // sentinel
    }
    children.push_back(std::move(child));
  }
  return children;
}

/// DUCB inequality: the best child replaces the root only when its score
/// strictly exceeds the root's, otherwise the root is retained. N is the
/// root's visit count including the in-flight visit, so a root's very
/// first comparison is greedy (ln 1 = 0). Ties among children resolve to
/// the lowest index; a root/child tie retains the root.
inline std::pair<Point, bool> conditional_select(
    const Point& root, const std::vector<Point>& children,
    const std::function<double(const Point&)>& values, const VisitTable& visits,
    double c_eff) {
  if (children.empty()) throw std::invalid_argument("conditional_select: no children");
  const int n_root_total = visits.count(root) + 1;
  const double root_score = ducb(values(root), visits.count(root), n_root_total, c_eff);
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < children.size(); ++i) {
    const double s = ducb(values(children[i]), visits.count(children[i]), n_root_total, c_eff);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  if (best_score > root_score) return {children[best], true};
  return {root, false};
}

/// Local backpropagation: bump the current root, and the accepted child if
/// any. Nothing else changes; values are never stored in the table.
inline void local_backprop(VisitTable& visits, const Point& root,
                           const std::optional<Point>& selected) {
  visits.increment(root);
  if (selected) visits.increment(*selected);
}

/// One search phase: repeat {expand, evaluate children, conditional select,
/// local backprop} for params.rollouts iterations. value_fn must already be
/// in the maximization frame (minimization objectives negated on entry);
/// it is consulted once per distinct point, the record caches the rest.
inline RolloutRecord rollout_search(const Point& start,
                                    const std::function<double(const Point&)>& value_fn,
                                    const SearchSpace& space, const ConstraintSet& constraints,
                                    const DucbParams& params,
                                    const std::vector<double>& labels_for_weight, Rng& rng) {
  params.validate();
  if (!constraints.ok(start)) throw InfeasibleError("rollout_search: start point violates constraints");

  const double c_eff = params.exploration_override
                           ? *params.exploration_override
                           : adaptive_weight(params.c0, labels_for_weight);

  RolloutRecord record;
  VisitTable visits;
  auto cached_value = [&record, &value_fn](const Point& p) -> double {
    auto it = record.visited.find(p);
    if (it != record.visited.end()) return it->second.value;
    const double v = value_fn(p);
    record.visited.emplace(p, NodeStat{v, 0});
    return v;
  };

  Point root = start;
  cached_value(root);
  record.trajectory.push_back(root);

  for (int r = 0; r < params.rollouts; ++r) {
    const auto children = stochastic_expansion(root, space, constraints, params, rng);
    for (const auto& c : children) cached_value(c);
    auto [next, accepted] =
        conditional_select(root, children, cached_value, visits, c_eff);
    if (params.local_backprop)
      local_backprop(visits, root, accepted ? std::optional<Point>(next) : std::nullopt);
    if (accepted) {
      root = std::move(next);
      record.trajectory.push_back(root);
    }
  }

  for (auto& [p, stat] : record.visited) stat.visits = visits.count(p);
  return record;
}

}  // namespace dots
