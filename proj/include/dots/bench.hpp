#pragma once

#include <atomic>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dots/driver.hpp"
#include "dots/evalproto.hpp"
#include "dots/objective.hpp"

namespace dots {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BenchScenario { exact, surrogate, random };

/// One experiment: objective + space + run settings + repetition plan.
/// Parsed from a plain key = value file with strict schema validation.
struct BenchConfig {
  std::string objective_name;
  std::vector<std::string> components;  // for objective = product
  std::size_t dims = 0;
  std::vector<double> lower{-5.0}, upper{5.0}, step{0.1};  // scalars broadcast
  BenchScenario scenario = BenchScenario::exact;
  RunConfig run;
  int repeats = 5;
  std::uint64_t seed_base = 0;
  std::string out_dir;
  int parallelism = static_cast<int>(std::thread::hardware_concurrency());

  // external objective settings
  std::string external_transport;
  long timeout_ms = 10000;
  int inflight = 1;
  Direction direction = Direction::minimize;
  std::optional<double> target;  // known optimum override

  SearchSpace make_space() const {
    auto broadcast = [this](const std::vector<double>& v, const char* key) {
      if (v.size() == 1) return std::vector<double>(dims, v[0]);
      if (v.size() == dims) return v;
      throw ConfigError(std::string("config error: key '") + key +
                        "' must have 1 or dims entries");
    };
    return SearchSpace(broadcast(lower, "lower"), broadcast(upper, "upper"),
                       broadcast(step, "step"));
  }

  Objective make_objective(const SearchSpace& space) const {
    Objective o;
    if (objective_name == "external") {
      ExternalConfig ec;
      ec.transport = external_transport;
      ec.timeout = std::chrono::milliseconds(timeout_ms);
      ec.inflight = inflight;
      ec.direction = direction;
      ec.known_best = target;
      o = external_objective(ec, space);
    } else if (objective_name == "product") {
      std::vector<Objective> parts;
      for (const auto& name : components) parts.push_back(make_benchmark(name, space));
      o = product(std::move(parts));
    } else {
      o = make_benchmark(objective_name, space);
    }
    if (target) o.best_value = target;
    return o;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(std::string v) {
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ConfigError("config error: unterminated list: " + v);
    v = v.substr(1, v.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class KeyValueFile {
 public:
  explicit KeyValueFile(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config error: cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config error: line " + std::to_string(lineno) +
                          " is not key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("config error: empty key on line " + std::to_string(lineno));
      kv_[key] = value;
    }
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string str(const std::string& key) {
    used_.insert(key);
    return kv_.at(key);
  }

  template <typename T, typename Parse>
  T get(const std::string& key, T fallback, Parse parse) {
    if (!has(key)) return fallback;
    used_.insert(key);
    try {
      return parse(kv_.at(key));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("config error: key '" + key + "' has invalid value '" + kv_.at(key) + "'");
    }
  }

  void check_all_used() const {
    for (const auto& [k, v] : kv_)
      if (!used_.count(k)) throw ConfigError("config error: unknown key '" + k + "'");
  }

 private:
  std::map<std::string, std::string> kv_;
  std::set<std::string> used_;
};

inline long parse_long(const std::string& s) {
  std::size_t pos = 0;
  const long v = std::stol(s, &pos);
  if (pos != s.size()) throw std::invalid_argument(s);
  return v;
}

inline double parse_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument(s);
  return v;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument(s);
}

inline std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_double(item));
  if (out.empty()) throw std::invalid_argument(s);
  return out;
}

}  // namespace detail

inline BenchConfig load_bench_config(const std::string& path) {
  detail::KeyValueFile kv(path);
  BenchConfig c;

  for (const char* key : {"objective", "dims", "scenario", "out_dir"})
    if (!kv.has(key)) throw ConfigError(std::string("config error: missing required key '") + key + "'");

  c.objective_name = kv.str("objective");
  static const std::set<std::string> known_objectives = {
      "ackley", "rosenbrock", "rastrigin", "griewank", "schwefel", "michalewicz",
      "external", "product"};
  if (!known_objectives.count(c.objective_name))
    throw ConfigError("config error: key 'objective' has invalid value '" + c.objective_name + "'");

  c.dims = static_cast<std::size_t>(kv.get<long>("dims", 0, detail::parse_long));
  if (c.dims < 1) throw ConfigError("config error: key 'dims' must be a positive integer");

  const std::string scen = kv.str("scenario");
  if (scen == "exact") c.scenario = BenchScenario::exact;
  else if (scen == "surrogate") c.scenario = BenchScenario::surrogate;
  else if (scen == "random") c.scenario = BenchScenario::random;
  else throw ConfigError("config error: key 'scenario' must be exact|surrogate|random");

  c.out_dir = kv.str("out_dir");

  c.lower = kv.get("lower", c.lower, detail::parse_double_list);
  c.upper = kv.get("upper", c.upper, detail::parse_double_list);
  c.step = kv.get("step", c.step, detail::parse_double_list);

  if (c.objective_name == "product") {
    if (!kv.has("components"))
      throw ConfigError("config error: objective = product requires key 'components'");
    c.components = detail::split_list(kv.str("components"));
    if (c.components.empty())
      throw ConfigError("config error: key 'components' must name at least one objective");
  }

  c.run.init_points = static_cast<int>(kv.get<long>("init_points", c.run.init_points, detail::parse_long));
  c.run.batch = static_cast<int>(kv.get<long>("batch", c.run.batch, detail::parse_long));
  c.run.rounds = static_cast<int>(kv.get<long>("rounds", c.run.rounds, detail::parse_long));
  c.run.eval_budget = kv.get<long>("eval_budget", c.run.eval_budget, detail::parse_long);
  c.run.chains = static_cast<int>(kv.get<long>("chains", c.run.chains, detail::parse_long));
  c.run.tol = kv.get<double>("tol", c.run.tol, detail::parse_double);
  c.run.search.c0 = kv.get<double>("c0", c.run.search.c0, detail::parse_double);
  c.run.search.rollouts = static_cast<int>(kv.get<long>("rollouts", c.run.search.rollouts, detail::parse_long));

  const auto mut = kv.get<std::vector<double>>(
      "mutation_range", {c.run.search.mutation_lo, c.run.search.mutation_hi},
      detail::parse_double_list);
  if (mut.size() != 2) throw ConfigError("config error: key 'mutation_range' must be [lo, hi]");
  c.run.search.mutation_lo = mut[0];
  c.run.search.mutation_hi = mut[1];

  const auto ratio = kv.get<std::vector<double>>(
      "sample_ratio", {5.0, 1.0}, detail::parse_double_list);
  if (ratio.size() != 2 || ratio[0] < 0 || ratio[1] < 0)
    throw ConfigError("config error: key 'sample_ratio' must be [score_parts, visit_parts]");
  c.run.sample_ratio = {static_cast<int>(ratio[0]), static_cast<int>(ratio[1])};

  c.run.ablations.no_local_backprop = kv.get<bool>("no_local_backprop", false, detail::parse_bool);
  c.run.ablations.no_adaptive_weight = kv.get<bool>("no_adaptive_weight", false, detail::parse_bool);
  c.run.ablations.no_top_visit = kv.get<bool>("no_top_visit", false, detail::parse_bool);
  c.run.ablations.greedy = kv.get<bool>("greedy", false, detail::parse_bool);

  const auto hidden = kv.get<std::vector<double>>("hidden", {}, detail::parse_double_list);
  for (double h : hidden) c.run.regressor.hidden.push_back(static_cast<int>(h));
  c.run.regressor.epochs = static_cast<int>(kv.get<long>("epochs", c.run.regressor.epochs, detail::parse_long));
  c.run.regressor.batch_size = static_cast<int>(kv.get<long>("train_batch", c.run.regressor.batch_size, detail::parse_long));
  c.run.regressor.learning_rate = kv.get<double>("learning_rate", c.run.regressor.learning_rate, detail::parse_double);
  c.run.regressor.weight_decay = kv.get<double>("weight_decay", c.run.regressor.weight_decay, detail::parse_double);
  const std::string loss = kv.get<std::string>("loss", "mse", [](const std::string& s) { return s; });
  if (loss == "mse") c.run.regressor.loss = LossKind::squared_error;
  else if (loss == "mape") c.run.regressor.loss = LossKind::absolute_percentage_error;
  else throw ConfigError("config error: key 'loss' must be mse|mape");

  c.repeats = static_cast<int>(kv.get<long>("repeats", c.repeats, detail::parse_long));
  if (c.repeats < 1) throw ConfigError("config error: key 'repeats' must be >= 1");
  c.seed_base = static_cast<std::uint64_t>(kv.get<long>("seed_base", 0, detail::parse_long));
  c.parallelism = static_cast<int>(kv.get<long>("parallelism", c.parallelism, detail::parse_long));
  if (c.parallelism < 1) c.parallelism = 1;

  c.external_transport = kv.get<std::string>("external", "", [](const std::string& s) { return s; });
  c.timeout_ms = kv.get<long>("timeout_ms", c.timeout_ms, detail::parse_long);
  c.inflight = static_cast<int>(kv.get<long>("inflight", c.inflight, detail::parse_long));
  const std::string dir = kv.get<std::string>("direction", "minimize", [](const std::string& s) { return s; });
  if (dir == "minimize") c.direction = Direction::minimize;
  else if (dir == "maximize") c.direction = Direction::maximize;
  else throw ConfigError("config error: key 'direction' must be minimize|maximize");
  if (kv.has("target")) c.target = kv.get<double>("target", 0.0, detail::parse_double);

  if (c.objective_name == "external" && c.external_transport.empty())
    throw ConfigError("config error: objective = external requires key 'external'");

  kv.check_all_used();

  try {
    c.run.validate();
    c.make_space();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  return c;
}

namespace detail {

inline void parallel_for(int n, int workers, const std::function<void(int)>& f) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  auto run = [&] {
    for (int i; (i = next.fetch_add(1)) < n;) f(i);
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Effective configuration as sorted key = value lines; what the manifest
/// records so default drift can never silently change results.
inline std::string effective_config_text(const BenchConfig& c) {
  std::map<std::string, std::string> kv;
  auto d = [](double v) { return format_double(v); };
  auto dl = [&](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + d(v[i]);
    return s + "]";
  };
  kv["objective"] = c.objective_name;
  if (!c.components.empty()) {
    std::string s;
    for (std::size_t i = 0; i < c.components.size(); ++i) s += (i ? "," : "") + c.components[i];
    kv["components"] = s;
  }
  kv["dims"] = std::to_string(c.dims);
  kv["lower"] = dl(c.lower);
  kv["upper"] = dl(c.upper);
  kv["step"] = dl(c.step);
  kv["scenario"] = c.scenario == BenchScenario::exact ? "exact"
                   : c.scenario == BenchScenario::surrogate ? "surrogate" : "random";
  kv["init_points"] = std::to_string(c.run.init_points);
  kv["batch"] = std::to_string(c.run.batch);
  kv["rounds"] = std::to_string(c.run.rounds);
  kv["eval_budget"] = std::to_string(c.run.eval_budget);
  kv["chains"] = std::to_string(c.run.chains);
  kv["tol"] = d(c.run.tol);
  kv["c0"] = d(c.run.search.c0);
  kv["rollouts"] = std::to_string(c.run.search.rollouts);
  kv["mutation_range"] = dl({c.run.search.mutation_lo, c.run.search.mutation_hi});
  kv["sample_ratio"] = "[" + std::to_string(c.run.sample_ratio.first) + ", " +
                       std::to_string(c.run.sample_ratio.second) + "]";
  kv["no_local_backprop"] = c.run.ablations.no_local_backprop ? "true" : "false";
  kv["no_adaptive_weight"] = c.run.ablations.no_adaptive_weight ? "true" : "false";
  kv["no_top_visit"] = c.run.ablations.no_top_visit ? "true" : "false";
  kv["greedy"] = c.run.ablations.greedy ? "true" : "false";
  std::string hidden = "[";
  for (std::size_t i = 0; i < c.run.regressor.hidden.size(); ++i)
    hidden += (i ? ", " : "") + std::to_string(c.run.regressor.hidden[i]);
  kv["hidden"] = hidden + "]";
  kv["epochs"] = std::to_string(c.run.regressor.epochs);
  kv["train_batch"] = std::to_string(c.run.regressor.batch_size);
  kv["learning_rate"] = d(c.run.regressor.learning_rate);
  kv["weight_decay"] = d(c.run.regressor.weight_decay);
  kv["loss"] = c.run.regressor.loss == LossKind::squared_error ? "mse" : "mape";
  kv["repeats"] = std::to_string(c.repeats);
  kv["seed_base"] = std::to_string(c.seed_base);
  kv["out_dir"] = c.out_dir;
  if (!c.external_transport.empty()) {
    kv["external"] = c.external_transport;
    kv["timeout_ms"] = std::to_string(c.timeout_ms);
    kv["inflight"] = std::to_string(c.inflight);
  }
  kv["direction"] = c.direction == Direction::minimize ? "minimize" : "maximize";
  if (c.target) kv["target"] = d(*c.target);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  return h;
}

struct RunOutcome {
  std::uint64_t seed = 0;
  std::optional<RunHistory> history;
  std::string error;
};

inline RunHistory dispatch_run(const BenchConfig& c, const SearchSpace& space,
                               std::uint64_t seed) {
  RunConfig rc = c.run;
  rc.seed = seed;
  const Objective obj = c.make_objective(space);  // external spawns per run
  const ConstraintSet none;
  switch (c.scenario) {
    case BenchScenario::exact: rc.scenario = Scenario::exact; return run_exact(obj, space, none, rc);
    case BenchScenario::surrogate:
      rc.scenario = Scenario::surrogate;
      return run_surrogate(obj, space, none, rc);
    case BenchScenario::random: return random_search_baseline(obj, space, rc);
  }
  throw std::logic_error("unreachable scenario");
}

inline std::vector<RunOutcome> run_repeats(const BenchConfig& c, const SearchSpace& space) {
  std::vector<RunOutcome> out(static_cast<std::size_t>(c.repeats));
  parallel_for(c.repeats, c.parallelism, [&](int i) {
    auto& slot = out[static_cast<std::size_t>(i)];
    slot.seed = c.seed_base + static_cast<std::uint64_t>(i);
    try {
      slot.history = dispatch_run(c, space, slot.seed);
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  });
  return out;
}

inline std::optional<double> config_target(const BenchConfig& c, const SearchSpace& space) {
  if (c.target) return c.target;
  if (c.objective_name != "external" && c.objective_name != "product")
    return make_benchmark(c.objective_name, space).best_value;
  return std::nullopt;
}

}  // namespace detail

/// Final best values parsed from a history CSV emitted by cmd_run.
inline double history_csv_final_best(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open history file " + path);
  std::string line, last;
  std::getline(f, line);
  if (line != kHistoryCsvHeader)
    throw std::runtime_error("unexpected history header in " + path);
  while (std::getline(f, line))
    if (!line.empty()) last = line;
  if (last.empty()) throw std::runtime_error("empty history in " + path);
  std::stringstream ss(last);
  std::string field;
  std::getline(ss, field, ',');  // round
  std::getline(ss, field, ',');  // evals_cum
  std::getline(ss, field, ',');  // best_value
  return detail::parse_double(field);
}

/// run <config>: execute `repeats` seeded runs, emit per-run history CSVs,
/// a one-row summary table and a reproducibility manifest.
inline int cmd_run(const std::string& config_path, std::ostream& diag) {
  BenchConfig c;
  try {
    c = load_bench_config(config_path);
  } catch (const ConfigError& e) {
    diag << e.what() << "\n";
    return 2;
  }
  const SearchSpace space = c.make_space();
  namespace fs = std::filesystem;
  fs::create_directories(c.out_dir);

  const auto outcomes = detail::run_repeats(c, space);

  std::vector<RunHistory> histories;
  std::vector<double> bests;
  std::vector<double> evals_to_conv;
  int failures = 0;
  for (const auto& oc : outcomes) {
    if (!oc.history) {
      ++failures;
      diag << "seed " << oc.seed << " failed: " << oc.error << "\n";
      continue;
    }
    const auto& h = *oc.history;
    std::ofstream f(fs::path(c.out_dir) / ("run_" + std::to_string(oc.seed) + "_history.csv"));
    f << history_csv(h);
    histories.push_back(h);
    bests.push_back(h.best_value);
    if (h.status == RunHistory::Status::converged)
      evals_to_conv.push_back(static_cast<double>(h.total_evals));
  }

  const auto target = detail::config_target(c, space);
  double ratio = std::numeric_limits<double>::quiet_NaN();
  if (target && !histories.empty()) ratio = convergence_ratio(histories, *target, c.run.tol);

  {
    std::ofstream f(fs::path(c.out_dir) / "summary.csv");
    f << "objective,dims,scenario,repeats,converged,convergence_ratio,median_best,"
         "median_evals_to_converge,failures\n";
    f << c.objective_name << ',' << c.dims << ','
      << (c.scenario == BenchScenario::exact ? "exact"
          : c.scenario == BenchScenario::surrogate ? "surrogate" : "random")
      << ',' << c.repeats << ',' << evals_to_conv.size() << ','
      << detail::format_double(ratio) << ',' << detail::format_double(detail::median(bests))
      << ',' << detail::format_double(detail::median(evals_to_conv)) << ',' << failures << "\n";
  }
  {
    const std::string body = detail::effective_config_text(c);
    std::ofstream f(fs::path(c.out_dir) / "manifest.txt");
    f << body;
    f << "config_hash = " << std::hex << detail::fnv1a(body) << std::dec << "\n";
    f << "seeds =";
    for (const auto& oc : outcomes) f << " " << oc.seed;
    f << "\n";
  }
  diag << "wrote " << histories.size() << " histories to " << c.out_dir << "\n";
  return failures == 0 ? 0 : 1;
}

struct AblationVariant {
  const char* name;
  int order;
  AblationFlags flags;
};

inline std::vector<AblationVariant> ablation_variants() {
  return {
      {"full", 0, {}},
      {"no_top_visit", 1, {.no_top_visit = true}},
      {"no_adaptive_weight", 2, {.no_adaptive_weight = true}},
      {"no_local_backprop", 3, {.no_local_backprop = true}},
      {"greedy", 4, {.greedy = true}},
  };
}

/// ablate <config>: the four single-mechanism ablations plus full DOTS
/// under one shared seed set; emits a per-run table and per-variant medians.
inline int cmd_ablate(const std::string& config_path, std::ostream& diag) {
  BenchConfig c;
  try {
    c = load_bench_config(config_path);
  } catch (const ConfigError& e) {
    diag << e.what() << "\n";
    return 2;
  }
  const SearchSpace space = c.make_space();
  namespace fs = std::filesystem;
  fs::create_directories(c.out_dir);
  const auto target = detail::config_target(c, space);

  std::ofstream table(fs::path(c.out_dir) / "ablation.csv");
  table << "variant,order,seed,best_value,evals,status\n";
  std::ofstream summary(fs::path(c.out_dir) / "ablation_summary.csv");
  summary << "variant,order,median_best,convergence_ratio\n";

  int failures = 0;
  for (const auto& variant : ablation_variants()) {
    BenchConfig vc = c;
    vc.run.ablations = variant.flags;
    const auto outcomes = detail::run_repeats(vc, space);
    std::vector<RunHistory> histories;
    std::vector<double> bests;
    for (const auto& oc : outcomes) {
      if (!oc.history) {
        ++failures;
        diag << variant.name << " seed " << oc.seed << " failed: " << oc.error << "\n";
        continue;
      }
      histories.push_back(*oc.history);
      bests.push_back(oc.history->best_value);
      table << variant.name << ',' << variant.order << ',' << oc.seed << ','
            << detail::format_double(oc.history->best_value) << ',' << oc.history->total_evals
            << ','
            << (oc.history->status == RunHistory::Status::converged ? "converged"
                                                                    : "budget_exhausted")
            << "\n";
    }
    double ratio = std::numeric_limits<double>::quiet_NaN();
    if (target && !histories.empty()) ratio = convergence_ratio(histories, *target, c.run.tol);
    summary << variant.name << ',' << variant.order << ','
            << detail::format_double(detail::median(bests)) << ','
            << detail::format_double(ratio) << "\n";
    diag << "variant " << variant.name << ": median best "
         << detail::median(bests) << "\n";
  }
  return failures == 0 ? 0 : 1;
}

/// ratio <dir>: recompute the convergence ratio over emitted history files.
inline int cmd_ratio(const std::string& dir, double target, double tol, std::ostream& out) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  if (!fs::is_directory(dir)) {
    out << "not a directory: " << dir << "\n";
    return 2;
  }
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.size() > 12 && name.substr(name.size() - 12) == "_history.csv")
      files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    out << "no *_history.csv files in " << dir << "\n";
    return 2;
  }
  std::size_t hit = 0;
  for (const auto& f : files)
    if (std::abs(history_csv_final_best(f) - target) <= tol) ++hit;
  const double ratio = static_cast<double>(hit) / static_cast<double>(files.size());
  out << "convergence_ratio " << detail::format_double(ratio) << " (" << hit << "/"
      << files.size() << ")\n";
  return 0;
}

/// check-evaluator <transport>: handshake plus three canned requests, one
/// named pass/fail line per protocol expectation.
inline int cmd_check_evaluator(const std::string& transport_spec, std::ostream& out,
                               long timeout_ms = 5000) {
  const std::vector<std::vector<double>> probes = {{0.0, 0.0}, {1.0, -1.0}, {0.5, 0.25}};
  int violations = 0;
  auto report = [&](const std::string& what, bool ok, const std::string& detail = "") {
    out << (ok ? "[pass] " : "[FAIL] ") << what;
    if (!ok && !detail.empty()) out << ": " << detail;
    out << "\n";
    if (!ok) ++violations;
  };
  try {
    EvalSession session(open_transport(transport_spec), 2,
                        std::chrono::milliseconds(timeout_ms), 1);
    report("handshake answered and well-formed", true);
    for (std::size_t i = 0; i < probes.size(); ++i) {
      try {
        const double y = session.evaluate(probes[i]);
        report("request " + std::to_string(i + 1) + " answered with matching id and numeric y",
               std::isfinite(y), "y is not finite");
      } catch (const std::exception& e) {
        report("request " + std::to_string(i + 1) + " answered with matching id and numeric y",
               false, e.what());
      }
    }
  } catch (const std::exception& e) {
    report("handshake answered and well-formed", false, e.what());
  }
  if (violations == 0) {
    out << "evaluator conforms to dots-eval v1\n";
    return 0;
  }
  out << violations << " protocol violation(s)\n";
  return 3;
}

}  // namespace dots
