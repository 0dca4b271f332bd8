#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "dots/space.hpp"

namespace dots {

/// Labeled evaluations (x_i, y_i) on one search space. Points are unique
/// under exact lattice-index equality; each entry remembers the round it
/// was acquired in.
class Dataset {
 public:
  explicit Dataset(SearchSpace space) : space_(std::move(space)) {}

  /// Insert a labeled point; returns false (and changes nothing) if the
  /// point is already present.
  bool add(Point p, double label, int round = 0) {
    space_.check_dims(p.ix.size());
    auto [it, inserted] = index_.emplace(p, points_.size());
    if (!inserted) return false;
    points_.push_back(std::move(p));
    labels_.push_back(label);
    rounds_.push_back(round);
    return true;
  }

  bool contains(const Point& p) const { return index_.count(p) != 0; }

  std::optional<double> find(const Point& p) const {
    auto it = index_.find(p);
    if (it == index_.end()) return std::nullopt;
    return labels_[it->second];
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  const Point& point(std::size_t i) const { return points_[i]; }
  double label(std::size_t i) const { return labels_[i]; }
  int round_of(std::size_t i) const { return rounds_[i]; }

  const std::vector<Point>& points() const { return points_; }
  const std::vector<double>& labels() const { return labels_; }
  const SearchSpace& space() const { return space_; }

  /// Indices sorted best-first for the given sense (ascending labels when
  /// minimizing). Ties keep insertion order.
  std::vector<std::size_t> ranked_indices(bool minimize) const {
    std::vector<std::size_t> idx(points_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return minimize ? labels_[a] < labels_[b] : labels_[a] > labels_[b];
    });
    return idx;
  }

 private:
  SearchSpace space_;
  std::vector<Point> points_;
  std::vector<double> labels_;
  std::vector<int> rounds_;
  std::unordered_map<Point, std::size_t, PointHash> index_;
};

}  // namespace dots
