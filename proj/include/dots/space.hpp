#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dots/rng.hpp"

namespace dots {

/// A position on the lattice, stored as per-dimension integer indices.
/// Indices (not reals) are the node identity: hashing and equality are
/// exact, which the visit table relies on. Real coordinates are
/// reconstructed on demand via SearchSpace::realize.
struct Point {
  std::vector<std::int32_t> ix;

  auto operator<=>(const Point&) const = default;
  std::size_t dims() const { return ix.size(); }
};

struct PointHash {
  std::size_t operator()(const Point& p) const noexcept {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (std::int32_t v : p.ix) {
      auto u = static_cast<std::uint32_t>(v);
      for (int k = 0; k < 4; ++k) {
        h ^= (u >> (8 * k)) & 0xffu;
        h *= 1099511628211ull;
      }
    }
    return static_cast<std::size_t>(h);
  }
};

/// Thrown when rejection sampling cannot produce a feasible point.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bounded lattice: per-dimension lower/upper bounds and step size.
/// Immutable after construction; safe to share across threads.
class SearchSpace {
 public:
  SearchSpace(std::vector<double> lower, std::vector<double> upper,
              std::vector<double> step)
      : lower_(std::move(lower)), upper_(std::move(upper)), step_(std::move(step)) {
    if (lower_.empty() || lower_.size() != upper_.size() || lower_.size() != step_.size())
      throw std::invalid_argument("SearchSpace: lower/upper/step sizes must match and be non-empty");
    sizes_.resize(lower_.size());
    for (std::size_t d = 0; d < lower_.size(); ++d) {
      if (!(lower_[d] < upper_[d]))
        throw std::invalid_argument("SearchSpace: lower must be < upper in dimension " + std::to_string(d));
      if (!(step_[d] > 0.0))
        throw std::invalid_argument("SearchSpace: step must be positive in dimension " + std::to_string(d));
      // small fuzz so spans like 10/0.1 land on the intended count
      sizes_[d] = static_cast<std::int64_t>(
                      std::floor((upper_[d] - lower_[d]) / step_[d] + 1e-9)) + 1;
      if (sizes_[d] < 2)
        throw std::invalid_argument("SearchSpace: fewer than 2 lattice points in dimension " + std::to_string(d));
    }
  }

  /// All dimensions share the same bounds and step.
  static SearchSpace uniform(std::size_t dims, double lo, double hi, double step) {
    return SearchSpace(std::vector<double>(dims, lo), std::vector<double>(dims, hi),
                       std::vector<double>(dims, step));
  }

  std::size_t dims() const { return lower_.size(); }
  std::int64_t lattice_size(std::size_t d) const { return sizes_[d]; }
  double lower(std::size_t d) const { return lower_[d]; }
  double upper(std::size_t d) const { return upper_[d]; }
  double step(std::size_t d) const { return step_[d]; }

  double realize(std::size_t d, std::int64_t index) const {
    return lower_[d] + static_cast<double>(index) * step_[d];
  }

  std::vector<double> realize(const Point& p) const {
    check_dims(p.ix.size());
    std::vector<double> x(p.ix.size());
    for (std::size_t d = 0; d < x.size(); ++d) x[d] = realize(d, p.ix[d]);
    return x;
  }

  bool contains(const Point& p) const {
    if (p.ix.size() != dims()) return false;
    for (std::size_t d = 0; d < dims(); ++d)
      if (p.ix[d] < 0 || p.ix[d] >= sizes_[d]) return false;
    return true;
  }

  /// Nearest lattice point. Out-of-range coordinates clamp to the nearest
  /// bound; exact half-way ties round away from zero (in value space).
  Point snap(const std::vector<double>& v) const {
    check_dims(v.size());
    Point p;
    p.ix.resize(v.size());
    for (std::size_t d = 0; d < v.size(); ++d) p.ix[d] = snap_coord(d, v[d]);
    return p;
  }

  void check_dims(std::size_t n) const {
    if (n != dims())
      throw std::invalid_argument("SearchSpace: dimension mismatch (got " + std::to_string(n) +
                                  ", expected " + std::to_string(dims()) + ")");
  }

 private:
  std::int32_t snap_coord(std::size_t d, double v) const {
    const std::int64_t last = sizes_[d] - 1;
    if (v <= lower_[d]) return 0;
    if (v >= realize(d, last)) return static_cast<std::int32_t>(last);
    auto k = static_cast<std::int64_t>(std::floor((v - lower_[d]) / step_[d]));
    if (k < 0) k = 0;
    if (k >= last) k = last - 1;
    const double a = realize(d, k), b = realize(d, k + 1);
    const double da = std::abs(v - a), db = std::abs(v - b);
    std::int64_t idx;
    if (da < db) idx = k;
    else if (db < da) idx = k + 1;
    else idx = (std::abs(b) >= std::abs(a)) ? k + 1 : k;  // tie: away from zero
    return static_cast<std::int32_t>(idx);
  }

  std::vector<double> lower_, upper_, step_;
  std::vector<std::int64_t> sizes_;
};

/// Ordered list of feasibility predicates; the empty set accepts all points.
class ConstraintSet {
 public:
  using Predicate = std::function<bool(const Point&)>;

  ConstraintSet() = default;
  explicit ConstraintSet(std::vector<Predicate> preds) : preds_(std::move(preds)) {}

  void add(Predicate p) { preds_.push_back(std::move(p)); }
  bool empty() const { return preds_.empty(); }
  std::size_t size() const { return preds_.size(); }

  bool ok(const Point& p) const {
    for (const auto& pred : preds_)
      if (!pred(p)) return false;
    return true;
  }

 private:
  std::vector<Predicate> preds_;
};

/// Uniform draw over lattice indices, rejection-sampled against the
/// constraints. Throws InfeasibleError once the rejection budget is spent.
inline Point random_point(const SearchSpace& space, const ConstraintSet& constraints,
                          Rng& rng, int rejection_budget = 10000) {
  for (int attempt = 0; attempt < rejection_budget; ++attempt) {
    Point p;
    p.ix.resize(space.dims());
    for (std::size_t d = 0; d < space.dims(); ++d)
      p.ix[d] = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(space.lattice_size(d))));
    if (constraints.ok(p)) return p;
  }
  throw InfeasibleError("random_point: no feasible point after " +
                        std::to_string(rejection_budget) + " draws");
}

}  // namespace dots
