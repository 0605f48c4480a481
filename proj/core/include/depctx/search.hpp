#pragma once

// Search over the lattice of context configurations.
//
// The pool holds the bags whose standalone fitness reaches the threshold.
// best_configuration_search starts at the full pool and walks down one
// level at a time, keeping every child (origin minus one bag) that scores
// at least as well as its origin, until the bottom level is reached or no
// child survives. greedy_search keeps only the best such child per level;
// exhaustive_search scores every nonempty subset of the pool.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "depctx/configuration.hpp"
#include "depctx/error.hpp"

namespace depctx {

// Fitness of a configuration, e.g. dev-fold Spearman rho after training.
// Undefined fitness should be reported as -infinity.
using FitnessFn = std::function<double(const Configuration&)>;

struct ConfigurationSpace {
  std::vector<std::string> all_bags;          // the M individual bags, sorted
  std::vector<std::string> pool;              // the K bags that passed, sorted
  std::map<std::string, double> bag_fitness;  // 1-set fitness of all M bags
  double threshold = 0.2;

  std::size_t m() const { return all_bags.size(); }
  std::size_t k() const { return pool.size(); }
};

class PoolInfeasible : public Error {
 public:
  PoolInfeasible(std::map<std::string, double> bag_fitness, double threshold);
  const std::map<std::string, double>& bag_fitness() const { return bag_fitness_; }
  double threshold() const { return threshold_; }

 private:
  std::map<std::string, double> bag_fitness_;
  double threshold_;
};

// pool = bags with fitness >= threshold. Throws PoolInfeasible if none.
ConfigurationSpace build_pool(const std::map<std::string, double>& bag_fitness, double threshold);

// Evaluates fitness_fn on every 1-set, then build_pool.
ConfigurationSpace build_pool(const std::vector<std::string>& bags, const FitnessFn& fitness_fn,
                              double threshold);

enum class TraceStatus {
  kPoolMember,  // 1-set that passed the threshold
  kExcluded,    // 1-set below the threshold
  kRoot,        // the full pool
  kKept,        // child scoring >= its origin
  kPruned,      // child not carried to the next level
  kFollowed,    // lower-scoring best child, followed in non-conservative mode
  kEnumerated,  // visited by exhaustive search
};

std::string_view to_string(TraceStatus status);

struct TraceEntry {
  Configuration configuration;
  std::size_t level = 0;  // number of bags
  double fitness = 0.0;
  TraceStatus status = TraceStatus::kEnumerated;
  std::optional<Configuration> origin;  // for kKept / kPruned / kFollowed
};

// Every configuration scored during one run, in first-evaluation order.
// A configuration never appears twice.
class SearchTrace {
 public:
  // Throws std::logic_error if `entry.configuration` is already present.
  void add(TraceEntry entry);
  TraceEntry* find(const Configuration& c);
  const TraceEntry* find(const Configuration& c) const;
  const std::vector<TraceEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  // Tab-separated: configuration, level, fitness, status, origin.
  std::string to_tsv() const;

 private:
  std::vector<TraceEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

struct SearchResult {
  Configuration best;
  double best_fitness = 0.0;
  SearchTrace trace;
  // fitness_fn invocations made by the search itself; the 1-set scores
  // come from the space and are not counted.
  std::size_t evaluations = 0;
};

struct SearchOptions {
  // Keep descending along the best child even when every child scores
  // below its origin.
  bool follow_best_child = false;
};

// Throws ConfigError when the pool is empty; fitness_fn failures propagate
// wrapped in an Error that names the configuration.
SearchResult best_configuration_search(const ConfigurationSpace& space, const FitnessFn& fitness_fn,
                                       SearchOptions options = {});

SearchResult greedy_search(const ConfigurationSpace& space, const FitnessFn& fitness_fn);

inline constexpr std::size_t kDefaultExhaustiveLimit = 12;

// Scores all 2^K - 1 subsets of the pool. Throws ConfigError when
// K > max_pool_size.
SearchResult exhaustive_search(const ConfigurationSpace& space, const FitnessFn& fitness_fn,
                               std::size_t max_pool_size = kDefaultExhaustiveLimit);

// Configurations the full protocol can touch: (2^K - 1) + (M - K).
std::uint64_t count_space(std::uint64_t m, std::uint64_t k);

enum class SearchStrategy { kAlg1, kGreedy, kExhaustive };
std::string_view to_string(SearchStrategy s);
SearchStrategy parse_search_strategy(std::string_view text);  // "alg1" | "greedy" | "exhaustive"

}  // namespace depctx
