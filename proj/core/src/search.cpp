#include "depctx/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace depctx {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double sanitize(double f) { return std::isnan(f) ? kNegInf : f; }

// True when (fa, a) beats (fb, b): higher fitness, then tie_break_less.
bool better(double fa, const Configuration& a, double fb, const Configuration& b) {
  if (fa != fb) return fa > fb;
  return tie_break_less(a, b);
}

std::string format_fitness(double f) { return fmt::format("{:.17g}", f); }

class Runner {
 public:
  Runner(const ConfigurationSpace& space, const FitnessFn& fn) : space_(space), fn_(fn) {
    if (space.pool.empty()) throw ConfigError("search needs a nonempty pool");
    for (const auto& bag : space.all_bags) {
      auto it = space.bag_fitness.find(bag);
      if (it == space.bag_fitness.end()) {
        throw ConfigError(fmt::format("no 1-set fitness for bag '{}'", bag));
      }
      const bool in_pool = std::binary_search(space.pool.begin(), space.pool.end(), bag);
      result_.trace.add({Configuration({bag}), 1, sanitize(it->second),
                         in_pool ? TraceStatus::kPoolMember : TraceStatus::kExcluded, std::nullopt});
    }
  }

  // Fitness of `c`, scoring it only if it was never seen. Returns the
  // trace entry; `fresh` tells whether it was just added.
  TraceEntry& visit(const Configuration& c, TraceStatus status, const std::optional<Configuration>& origin,
                    bool& fresh) {
    if (TraceEntry* e = result_.trace.find(c)) {
      fresh = false;
      return *e;
    }
    double f;
    try {
      f = sanitize(fn_(c));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("fitness evaluation failed for {}: {}", c.canonical(), e.what()));
    } catch (const std::exception& e) {
      throw Error(fmt::format("fitness evaluation failed for {}: {}", c.canonical(), e.what()));
    }
    ++result_.evaluations;
    result_.trace.add({c, c.size(), f, status, origin});
    fresh = true;
    return *result_.trace.find(c);
  }

  Configuration root() const { return Configuration(space_.pool); }

  SearchResult finish() {
    const TraceEntry* best = nullptr;
    for (const auto& e : result_.trace.entries()) {
      if (e.status == TraceStatus::kExcluded) continue;
      if (!best || better(e.fitness, e.configuration, best->fitness, best->configuration)) best = &e;
    }
    result_.best = best->configuration;
    result_.best_fitness = best->fitness;
    return std::move(result_);
  }

 private:
  const ConfigurationSpace& space_;
  const FitnessFn& fn_;
  SearchResult result_{Configuration({"_"}), 0.0, {}, 0};
};

SearchResult descend(const ConfigurationSpace& space, const FitnessFn& fn, bool greedy,
                     bool follow_best_child) {
  Runner run(space, fn);
  bool fresh = false;
  const Configuration root = run.root();
  TraceEntry& root_entry = run.visit(root, TraceStatus::kRoot, std::nullopt, fresh);
  std::vector<Configuration> frontier{root};
  std::vector<double> frontier_fitness{root_entry.fitness};

  while (!frontier.empty() && frontier.front().size() > 1) {
    // Children by canonical form, each with the frontier origins producing it.
    std::map<std::string, std::pair<Configuration, std::vector<std::size_t>>> children;
    for (std::size_t o = 0; o < frontier.size(); ++o) {
      for (const auto& bag : frontier[o].bags()) {
        Configuration child = frontier[o].without(bag);
        auto [it, inserted] = children.try_emplace(child.canonical(), child, std::vector<std::size_t>{});
        it->second.second.push_back(o);
      }
    }

    struct Scored {
      Configuration config;
      double fitness;
      std::optional<std::size_t> satisfied;  // origin it scores >= to
      std::size_t first_origin;
    };
    std::vector<Scored> scored;
    for (auto& [key, entry] : children) {
      auto& [child, origins] = entry;
      TraceEntry& e = run.visit(child, TraceStatus::kPruned, frontier[origins.front()], fresh);
      Scored s{child, e.fitness, std::nullopt, origins.front()};
      for (auto o : origins) {
        if (e.fitness >= frontier_fitness[o]) {
          s.satisfied = o;
          break;
        }
      }
      scored.push_back(std::move(s));
    }

    std::vector<const Scored*> next;
    for (const auto& s : scored) {
      if (s.satisfied) next.push_back(&s);
    }
    if (greedy && next.size() > 1) {
      auto best = *std::min_element(next.begin(), next.end(), [](const Scored* a, const Scored* b) {
        return better(a->fitness, a->config, b->fitness, b->config);
      });
      next = {best};
    }
    TraceStatus kept_status = TraceStatus::kKept;
    if (next.empty() && follow_best_child && !scored.empty()) {
      auto best = std::min_element(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        return better(a.fitness, a.config, b.fitness, b.config);
      });
      best->satisfied = best->first_origin;
      next = {&*best};
      kept_status = TraceStatus::kFollowed;
    }

    std::vector<Configuration> new_frontier;
    std::vector<double> new_fitness;
    for (const Scored* s : next) {
      new_frontier.push_back(s->config);
      new_fitness.push_back(s->fitness);
    }
    // Record the level's decisions on the trace entries.
    for (const auto& s : scored) {
      const bool carried = std::any_of(next.begin(), next.end(), [&](const Scored* n) { return n == &s; });
      TraceEntry& e = run.visit(s.config, TraceStatus::kPruned, std::nullopt, fresh);
      e.status = carried ? kept_status : TraceStatus::kPruned;
      e.origin = frontier[s.satisfied.value_or(s.first_origin)];
    }
    frontier = std::move(new_frontier);
    frontier_fitness = std::move(new_fitness);
  }
  return run.finish();
}

}  // namespace

PoolInfeasible::PoolInfeasible(std::map<std::string, double> bag_fitness, double threshold)
    : Error([&] {
        std::string msg = fmt::format("no context bag reaches the pool threshold {}:", threshold);
        for (const auto& [bag, f] : bag_fitness) msg += fmt::format("\n  {}\t{:.4f}", bag, f);
        return msg;
      }()),
      bag_fitness_(std::move(bag_fitness)),
      threshold_(threshold) {}

ConfigurationSpace build_pool(const std::map<std::string, double>& bag_fitness, double threshold) {
  ConfigurationSpace space;
  space.threshold = threshold;
  space.bag_fitness = bag_fitness;
  for (const auto& [bag, f] : bag_fitness) {
    space.all_bags.push_back(bag);
    if (f >= threshold) space.pool.push_back(bag);
  }
  if (space.pool.empty()) throw PoolInfeasible(bag_fitness, threshold);
  return space;
}

ConfigurationSpace build_pool(const std::vector<std::string>& bags, const FitnessFn& fitness_fn,
                              double threshold) {
  std::map<std::string, double> fitness;
  for (const auto& bag : bags) {
    try {
      fitness[bag] = sanitize(fitness_fn(Configuration({bag})));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("fitness evaluation failed for {}: {}", bag, e.what()));
    } catch (const std::exception& e) {
      throw Error(fmt::format("fitness evaluation failed for {}: {}", bag, e.what()));
    }
  }
  return build_pool(fitness, threshold);
}

std::string_view to_string(TraceStatus status) {
  switch (status) {
    case TraceStatus::kPoolMember:
      return "pool";
    case TraceStatus::kExcluded:
      return "excluded";
    case TraceStatus::kRoot:
      return "root";
    case TraceStatus::kKept:
      return "kept";
    case TraceStatus::kPruned:
      return "pruned";
    case TraceStatus::kFollowed:
      return "followed";
    case TraceStatus::kEnumerated:
      return "enumerated";
  }
  return "enumerated";
}

void SearchTrace::add(TraceEntry entry) {
  const std::string key = entry.configuration.canonical();
  if (index_.contains(key)) throw std::logic_error("configuration visited twice: " + key);
  index_.emplace(key, entries_.size());
  entries_.push_back(std::move(entry));
}

TraceEntry* SearchTrace::find(const Configuration& c) {
  auto it = index_.find(c.canonical());
  return it == index_.end() ? nullptr : &entries_[it->second];
}

const TraceEntry* SearchTrace::find(const Configuration& c) const {
  auto it = index_.find(c.canonical());
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::string SearchTrace::to_tsv() const {
  std::string out = "configuration\tlevel\tfitness\tstatus\torigin\n";
  for (const auto& e : entries_) {
    out += fmt::format("{}\t{}\t{}\t{}\t{}\n", e.configuration.canonical(), e.level, format_fitness(e.fitness),
                       to_string(e.status), e.origin ? e.origin->canonical() : "-");
  }
  return out;
}

SearchResult best_configuration_search(const ConfigurationSpace& space, const FitnessFn& fitness_fn,
                                       SearchOptions options) {
  return descend(space, fitness_fn, false, options.follow_best_child);
}

SearchResult greedy_search(const ConfigurationSpace& space, const FitnessFn& fitness_fn) {
  return descend(space, fitness_fn, true, false);
}

SearchResult exhaustive_search(const ConfigurationSpace& space, const FitnessFn& fitness_fn,
                               std::size_t max_pool_size) {
  const std::size_t k = space.k();
  if (k > max_pool_size) {
    throw ConfigError(fmt::format("exhaustive search over K={} bags needs {} evaluations; limit is K <= {}", k,
                                  (std::uint64_t{1} << std::min<std::size_t>(k, 63)) - 1, max_pool_size));
  }
  Runner run(space, fitness_fn);
  std::vector<Configuration> subsets;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k); ++mask) {
    std::vector<std::string> bags;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (std::uint64_t{1} << i)) bags.push_back(space.pool[i]);
    }
    subsets.emplace_back(std::move(bags));
  }
  std::sort(subsets.begin(), subsets.end(), tie_break_less);
  bool fresh = false;
  for (const auto& c : subsets) run.visit(c, TraceStatus::kEnumerated, std::nullopt, fresh);
  return run.finish();
}

std::uint64_t count_space(std::uint64_t m, std::uint64_t k) {
  if (k > m) throw std::invalid_argument(fmt::format("count_space: K={} exceeds M={}", k, m));
  if (k >= 64) throw std::overflow_error("count_space: K too large");
  return ((std::uint64_t{1} << k) - 1) + (m - k);
}

std::string_view to_string(SearchStrategy s) {
  switch (s) {
    case SearchStrategy::kAlg1:
      return "alg1";
    case SearchStrategy::kGreedy:
      return "greedy";
    case SearchStrategy::kExhaustive:
      return "exhaustive";
  }
  return "alg1";
}

SearchStrategy parse_search_strategy(std::string_view text) {
  if (text == "alg1") return SearchStrategy::kAlg1;
  if (text == "greedy") return SearchStrategy::kGreedy;
  if (text == "exhaustive") return SearchStrategy::kExhaustive;
  throw ConfigError(fmt::format("unknown search strategy '{}' (expected alg1, greedy or exhaustive)", text));
}

}  // namespace depctx
