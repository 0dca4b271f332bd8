#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dots/dataset.hpp"
#include "dots/search.hpp"

namespace dots {

/// The ground-truth evaluation batch drawn from a rollout record: a mix of
/// best-predicted and most-visited nodes.
struct SampleBatch {
  enum class Origin { top_score, top_visit };
  std::vector<Point> points;
  std::vector<Origin> origin;  // parallel to points
};

/// Top-visit sampling. visit_parts/(score_parts+visit_parts) of the batch
/// (floored, but at least one slot whenever visit_parts > 0) comes from the
/// most-visited candidates, the rest from the best-predicted ones. Points
/// already in the dataset or already chosen are skipped; when candidates
/// run out the batch is simply smaller. Ranking ties break on the other
/// criterion, then lexicographic lattice index, so sampling is
/// deterministic.
inline SampleBatch top_visit_sample(const RolloutRecord& record, const Dataset& dataset,
                                    int batch, std::pair<int, int> ratio = {5, 1}) {
  if (record.visited.empty()) throw std::invalid_argument("top_visit_sample: empty record");
  if (batch < 1) throw std::invalid_argument("top_visit_sample: batch must be >= 1");
  const auto [score_parts, visit_parts] = ratio;
  if (score_parts < 0 || visit_parts < 0 || score_parts + visit_parts == 0)
    throw std::invalid_argument("top_visit_sample: invalid ratio");

  int visit_slots = 0;
  if (visit_parts > 0) {
    visit_slots = std::max(1, batch * visit_parts / (score_parts + visit_parts));
    visit_slots = std::min(visit_slots, batch);
  }
  const int score_slots = batch - visit_slots;

  struct Cand {
    const Point* p;
    double value;
    int visits;
  };
  std::vector<Cand> cands;
  cands.reserve(record.visited.size());
  for (const auto& [p, stat] : record.visited)
    if (!dataset.contains(p)) cands.push_back({&p, stat.value, stat.visits});

  auto by_visits = [](const Cand& a, const Cand& b) {
    if (a.visits != b.visits) return a.visits > b.visits;
    if (a.value != b.value) return a.value > b.value;
    return *a.p < *b.p;
  };
  auto by_value = [](const Cand& a, const Cand& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.visits != b.visits) return a.visits > b.visits;
    return *a.p < *b.p;
  };

  SampleBatch out;
  std::vector<const Point*> visit_picks;
  std::vector<char> taken(cands.size(), 0);

  std::vector<std::size_t> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return by_visits(cands[a], cands[b]); });
  for (std::size_t i = 0; i < order.size() && static_cast<int>(visit_picks.size()) < visit_slots; ++i) {
    visit_picks.push_back(cands[order[i]].p);
    taken[order[i]] = 1;
  }

  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return by_value(cands[a], cands[b]); });
  for (std::size_t i = 0; i < order.size() && static_cast<int>(out.points.size()) < score_slots; ++i) {
    if (taken[order[i]]) continue;
    out.points.push_back(*cands[order[i]].p);
    out.origin.push_back(SampleBatch::Origin::top_score);
  }

  for (const Point* p : visit_picks) {
    out.points.push_back(*p);
    out.origin.push_back(SampleBatch::Origin::top_visit);
  }
  return out;
}

}  // namespace dots
