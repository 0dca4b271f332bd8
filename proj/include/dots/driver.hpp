#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dots/dataset.hpp"
#include "dots/objective.hpp"
#include "dots/sampler.hpp"
#include "dots/search.hpp"
#include "dots/surrogate.hpp"

namespace dots {

enum class Scenario { exact, surrogate };

struct AblationFlags {
  bool no_local_backprop = false;
  bool no_adaptive_weight = false;  // fixed c_eff = c0
  bool no_top_visit = false;        // pure top-k sampling
  bool greedy = false;              // c_eff = 0
};

struct RunConfig {
  Scenario scenario = Scenario::exact;
  int init_points = 200;
  int batch = 20;
  int rounds = 100;
  long eval_budget = 100000;
  int chains = 5;  // rollout start points per round
  AblationFlags ablations;
  std::uint64_t seed = 0;
  double tol = 1e-9;  // convergence tolerance against the known optimum
  DucbParams search;
  std::pair<int, int> sample_ratio{5, 1};
  RegressorConfig regressor;

  void validate() const {
    if (init_points < 1 || batch < 1 || rounds < 1 || chains < 1)
      throw std::invalid_argument("RunConfig: counts must be >= 1");
    if (eval_budget < init_points)
      throw std::invalid_argument("RunConfig: eval_budget must cover init_points");
    search.validate();
  }
};

struct RoundEntry {
  int round = 0;       // 0 is the initialization round
  long evals = 0;      // ground-truth evaluations performed in this round
  double best_value = 0.0;
  Point best_point;
  double c_eff = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
};

struct RunHistory {
  enum class Status { converged, budget_exhausted };
  std::vector<RoundEntry> rounds;
  Status status = Status::budget_exhausted;
  double best_value = 0.0;
  Point best_point;
  long total_evals = 0;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

struct search_stop {};  // budget spent or optimum reached mid-phase

/// Shared bookkeeping for both scenarios: dataset growth, budget
/// accounting, best-so-far tracking and the convergence test.
class EvalLedger {
 public:
  EvalLedger(const Objective& obj, const RunConfig& cfg, Dataset& data)
      : obj_(obj), cfg_(cfg), data_(data),
        minimize_(obj.direction == Direction::minimize) {}

  // true label, counted against the budget; throws search_stop at the
  // budget edge or as soon as the known optimum is reached
  double evaluate_new(const Point& p, int round) {
    if (count_ >= cfg_.eval_budget) throw search_stop{};
    const double y = obj_.evaluate(p);
    ++count_;
    if (data_.add(p, y, round)) note(y, p);
    if (converged_) throw search_stop{};
    return y;
  }

  bool better(double a, double b) const { return minimize_ ? a < b : a > b; }
  bool minimize() const { return minimize_; }
  long count() const { return count_; }
  bool converged() const { return converged_; }
  double best_value() const { return best_value_; }
  const Point& best_point() const { return best_point_; }

  /// Labels oriented so that min = best, the frame adaptive_weight expects.
  std::vector<double> weight_labels() const {
    std::vector<double> out = data_.labels();
    if (!minimize_)
      for (double& v : out) v = -v;
    return out;
  }

 private:
  void note(double y, const Point& p) {
    if (!seen_any_ || better(y, best_value_)) {
      best_value_ = y;
      best_point_ = p;
      seen_any_ = true;
      if (obj_.best_value && std::abs(best_value_ - *obj_.best_value) <= cfg_.tol)
        converged_ = true;
    }
  }

  const Objective& obj_;
  const RunConfig& cfg_;
  Dataset& data_;
  bool minimize_;
  long count_ = 0;
  bool seen_any_ = false;
  bool converged_ = false;
  double best_value_ = 0.0;
  Point best_point_;
};

inline void initialize(EvalLedger& ledger, const SearchSpace& space,
                       const ConstraintSet& constraints, const RunConfig& cfg, Rng& rng,
                       Dataset& data) {
  // draw init_points; duplicates in tiny lattices are skipped, not re-billed
  try {
    int drawn = 0, attempts = 0;
    const int attempt_cap = std::max(10 * cfg.init_points, 1000);
    while (drawn < cfg.init_points && attempts < attempt_cap) {
      ++attempts;
      Point p = random_point(space, constraints, rng);
      if (data.contains(p)) continue;
      ledger.evaluate_new(p, 0);
      ++drawn;
    }
  } catch (const search_stop&) {
  }
}

inline std::vector<Point> chain_starts(const Dataset& data, bool minimize, int chains) {
  std::vector<Point> starts;
  for (std::size_t i : data.ranked_indices(minimize)) {
    starts.push_back(data.point(i));
    if (static_cast<int>(starts.size()) >= chains) break;
  }
  return starts;
}

inline double resolve_c_eff(const RunConfig& cfg, const std::vector<double>& weight_labels) {
  if (cfg.ablations.greedy) return 0.0;
  if (cfg.ablations.no_adaptive_weight) return cfg.search.c0;
  return adaptive_weight(cfg.search.c0, weight_labels);
}

inline DucbParams phase_params(const RunConfig& cfg, double c_eff) {
  DucbParams p = cfg.search;
  p.local_backprop = !cfg.ablations.no_local_backprop;
  if (cfg.ablations.greedy || cfg.ablations.no_adaptive_weight) p.exploration_override = c_eff;
  return p;
}

inline void finish(RunHistory& h, const EvalLedger& ledger) {
  h.status = ledger.converged() ? RunHistory::Status::converged
                                : RunHistory::Status::budget_exhausted;
  h.best_value = ledger.best_value();
  h.best_point = ledger.best_point();
  h.total_evals = ledger.count();
}

}  // namespace detail

/// Exact-oracle scenario: node values come straight from the objective and
/// every distinct evaluation is banked into the dataset, so search and
/// sampling coincide. Chains start from the incumbent best points.
inline RunHistory run_exact(const Objective& objective, const SearchSpace& space,
                            const ConstraintSet& constraints, const RunConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  Dataset data(space);
  detail::EvalLedger ledger(objective, cfg, data);
  RunHistory history;

  detail::initialize(ledger, space, constraints, cfg, rng, data);
  history.rounds.push_back({0, ledger.count(), ledger.best_value(), ledger.best_point(),
                            std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN()});

  const double sign = ledger.minimize() ? -1.0 : 1.0;
  for (int round = 1; round <= cfg.rounds; ++round) {
    if (ledger.converged() || ledger.count() >= cfg.eval_budget) break;
    const long before = ledger.count();
    const auto labels = ledger.weight_labels();
    const double c_eff = detail::resolve_c_eff(cfg, labels);
    const DucbParams params = detail::phase_params(cfg, c_eff);
    auto value_fn = [&](const Point& p) -> double {
      if (auto y = data.find(p)) return sign * *y;
      return sign * ledger.evaluate_new(p, round);
    };
    try {
      for (const Point& start : detail::chain_starts(data, ledger.minimize(), cfg.chains))
        rollout_search(start, value_fn, space, constraints, params, labels, rng);
    } catch (const detail::search_stop&) {
    }
    history.rounds.push_back({round, ledger.count() - before, ledger.best_value(),
                              ledger.best_point(), c_eff,
                              std::numeric_limits<double>::quiet_NaN()});
    if (ledger.count() == before && !ledger.converged()) break;  // stalled
  }
  detail::finish(history, ledger);
  return history;
}

/// Surrogate scenario: per round, retrain the regressor on the dataset,
/// search its predictions, then spend the ground-truth budget on a
/// top-visit sample of what the search saw.
inline RunHistory run_surrogate(const Objective& objective, const SearchSpace& space,
                                const ConstraintSet& constraints, const RunConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  Dataset data(space);
  detail::EvalLedger ledger(objective, cfg, data);
  RunHistory history;

  detail::initialize(ledger, space, constraints, cfg, rng, data);
  history.rounds.push_back({0, ledger.count(), ledger.best_value(), ledger.best_point(),
                            std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN()});

  const double sign = ledger.minimize() ? -1.0 : 1.0;
  for (int round = 1; round <= cfg.rounds; ++round) {
    if (ledger.converged() || ledger.count() >= cfg.eval_budget) break;
    const long before = ledger.count();

    // 90/10 split for the fit diagnostic; the search model trains on the
    // 90% side (retrained from scratch, round-dependent seed)
    RegressorConfig rc = cfg.regressor;
    rc.seed = cfg.seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(round);
    Rng split_rng(rc.seed);
    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    split_rng.shuffle(idx);
    const std::size_t holdout_n = std::max<std::size_t>(1, data.size() / 10);
    Dataset train_data(space), holdout(space);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto& p = data.point(idx[i]);
      const double y = data.label(idx[i]);
      if (i < holdout_n) holdout.add(p, y);
      else train_data.add(p, y);
    }
    const Regressor model = train(train_data, rc);
    double r2 = std::numeric_limits<double>::quiet_NaN();
    if (holdout.size() >= 2) {
      try {
        r2 = r_squared(model, holdout);
      } catch (const std::invalid_argument&) {
      }
    }

    const auto labels = ledger.weight_labels();
    const double c_eff = detail::resolve_c_eff(cfg, labels);
    const DucbParams params = detail::phase_params(cfg, c_eff);
    auto value_fn = [&](const Point& p) { return sign * model.predict_one(p); };

    RolloutRecord merged;
    for (const Point& start : detail::chain_starts(data, ledger.minimize(), cfg.chains)) {
      RolloutRecord rec = rollout_search(start, value_fn, space, constraints, params, labels, rng);
      for (auto& [p, stat] : rec.visited) {
        auto [it, inserted] = merged.visited.emplace(p, stat);
        if (!inserted) it->second.visits += stat.visits;
      }
    }

    const auto ratio = cfg.ablations.no_top_visit ? std::pair<int, int>{1, 0} : cfg.sample_ratio;
    const SampleBatch batch = top_visit_sample(merged, data, cfg.batch, ratio);
    try {
      for (const Point& p : batch.points) ledger.evaluate_new(p, round);
    } catch (const detail::search_stop&) {
    }

    history.rounds.push_back({round, ledger.count() - before, ledger.best_value(),
                              ledger.best_point(), c_eff, r2});
    if (batch.points.empty()) break;  // search produced nothing new to sample
  }
  detail::finish(history, ledger);
  return history;
}

/// Control condition: uniform lattice sampling under the same budget and
/// history schema. Stops early if it happens to hit the known optimum.
inline RunHistory random_search_baseline(const Objective& objective, const SearchSpace& space,
                                         const RunConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const ConstraintSet none;
  const bool minimize = objective.direction == Direction::minimize;
  RunHistory history;
  double best = 0.0;
  Point best_point;
  bool seen = false, converged = false;
  long evals = 0;
  int round = 0;
  while (evals < cfg.eval_budget && !converged) {
    ++round;
    long in_round = 0;
    for (int i = 0; i < cfg.batch && evals < cfg.eval_budget; ++i) {
      const Point p = random_point(space, none, rng);
      const double y = objective.evaluate(p);
      ++evals;
      ++in_round;
      if (!seen || (minimize ? y < best : y > best)) {
        best = y;
        best_point = p;
        seen = true;
        if (objective.best_value && std::abs(best - *objective.best_value) <= cfg.tol) {
          converged = true;
          break;
        }
      }
    }
    history.rounds.push_back({round, in_round, best, best_point,
                              std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN()});
  }
  history.status = converged ? RunHistory::Status::converged
                             : RunHistory::Status::budget_exhausted;
  history.best_value = best;
  history.best_point = best_point;
  history.total_evals = evals;
  return history;
}

/// Fraction of repeated runs whose final best value lies within tol of the
/// target.
inline double convergence_ratio(const std::vector<RunHistory>& histories, double target,
                                double tol) {
  if (histories.empty()) throw std::invalid_argument("convergence_ratio: empty history list");
  std::size_t hit = 0;
  for (const auto& h : histories)
    if (std::abs(h.best_value - target) <= tol) ++hit;
  return static_cast<double>(hit) / static_cast<double>(histories.size());
}

inline constexpr const char* kHistoryCsvHeader = "round,evals_cum,best_value,c_eff,r2";

/// CSV emission consumed by the bench harness; evals accumulate so the
/// curve plots directly against data points acquired.
inline std::string history_csv(const RunHistory& h) {
  std::string out = std::string(kHistoryCsvHeader) + "\n";
  long cum = 0;
  for (const auto& r : h.rounds) {
    cum += r.evals;
    out += std::to_string(r.round);
    out += ',';
    out += std::to_string(cum);
    out += ',';
    out += detail::format_double(r.best_value);
    out += ',';
    out += detail::format_double(r.c_eff);
    out += ',';
    out += detail::format_double(r.r2);
    out += '\n';
  }
  return out;
}

}  // namespace dots
