// Acceptance criteria, one PASS/FAIL line each. Exit status is nonzero if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "depctx/bag_store.hpp"
#include "depctx/evaluation.hpp"
#include "depctx/extraction.hpp"
#include "depctx/pipeline.hpp"
#include "depctx/search.hpp"
#include "depctx/sgns.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace depctx;
using namespace depctx::testing;
namespace fs = std::filesystem;

namespace {

// A criterion returns an empty string on success, otherwise what went wrong.
struct Criterion {
  std::string name;
  double budget_seconds;  // <= 0: no time limit
  std::function<std::string()> check;
};

using StringSet = std::set<std::string>;

std::string describe(const StringSet& s) {
  std::string out = "{";
  for (const auto& x : s) out += (out.size() > 1 ? ", " : "") + x;
  return out + "}";
}

std::string extraction_golden() {
  const Sentence telescope = telescope_sentence();
  const auto& table = BagMappingTable::defaults();
  auto contexts_of = [](const std::vector<DependencyPair>& pairs, const std::string& word, bool file_form) {
    StringSet out;
    for (const auto& p : pairs) {
      if (p.word == word) out.insert(file_form ? p.file_context() : p.context());
    }
    return out;
  };
  const StringSet before = contexts_of(extract_deps_pairs(to_arc_sentence(telescope), table), "discovers", false);
  const StringSet want_before = {"scientist_nsubj", "stars_dobj", "telescope_nmod"};
  if (before != want_before) return "before collapsing: " + describe(before);
  const StringSet after =
      contexts_of(extract_deps_pairs(collapse_prepositions(telescope), table), "discovers", true);
  const StringSet want_after = {"scientist_nsubj", "stars_dobj", "telescope_prep"};
  if (after != want_after) return "after collapsing: " + describe(after);

  const ArcSentence coord = to_arc_sentence(boys_and_girls_sentence());
  auto pairs_of = [&](ConjVariant v) {
    StringSet out;
    for (const auto& p : extract_conj_pairs(coord, v)) out.insert("(" + p.word + ", " + p.context() + ")");
    return out;
  };
  const StringSet lr = pairs_of(ConjVariant::kConjLR);
  if (lr != StringSet{"(boys, girls_conj)", "(girls, boys_conj-1)"}) return "conjlr: " + describe(lr);
  const StringSet ll = pairs_of(ConjVariant::kConjLL);
  if (ll != StringSet{"(boys, girls_conj)", "(girls, boys_conj)"}) return "conjll: " + describe(ll);
  return {};
}

std::string search_space_sizes() {
  const std::vector<std::tuple<int, int, std::uint64_t>> cases = {{13, 7, 133}, {13, 10, 1026}, {13, 3, 17}};
  for (const auto& [m, k, want] : cases) {
    // independent count: nonempty subsets of the pool plus the excluded singletons
    const std::uint64_t oracle = ((std::uint64_t{1} << k) - 1) + static_cast<std::uint64_t>(m - k);
    const std::uint64_t got = count_space(static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(k));
    if (got != want || oracle != want) return fmt::format("M={} K={}: got {}, want {}", m, k, got, want);
  }
  return {};
}

std::string verb_pool() {
  const auto fixture = verb_fixture();
  const auto space = build_pool(fixture.fitness, 0.2);
  const StringSet pool(space.pool.begin(), space.pool.end());
  for (const char* bag : {"amod", "compound", "nummod"}) {
    if (pool.contains(bag)) return std::string(bag) + " entered the pool";
  }
  for (const char* bag : {"obj", "prep", "adv", "conjlr"}) {
    if (!pool.contains(bag)) return std::string(bag) + " missing from the pool";
  }
  const auto published = published_verb_pool();
  if (space.pool != published) return "pool " + describe(pool);
  return {};
}

std::string adjective_walkthrough() {
  const auto space = build_pool(adjective_bag_fitness(), 0.2);
  TableFitness fitness(adjective_landscape());
  const auto r = best_configuration_search(space, std::ref(fitness));
  if (r.best.canonical() != "amod+conj" || r.best_fitness != 0.546) {
    return fmt::format("returned {} ({})", r.best.canonical(), r.best_fitness);
  }
  const StringSet want = {"amod+conj", "amod+conjlr", "amod+conjll", "conj"};
  StringSet evaluated;
  for (const auto& [name, n] : fitness.calls()) evaluated.insert(name);
  if (evaluated != want || fitness.total_calls() != 4) {
    return fmt::format("evaluated {} ({} calls)", describe(evaluated), fitness.total_calls());
  }
  return {};
}

std::string strategy_ordering() {
  int strict = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t k = 1 + seed % 8;
    const std::size_t m = k + seed % 6;
    const auto land = random_landscape(1000 + seed, k, m);
    TableFitness fa(land.table), fg(land.table), fe(land.table);
    const auto a = best_configuration_search(land.space, std::ref(fa));
    const auto g = greedy_search(land.space, std::ref(fg));
    const auto e = exhaustive_search(land.space, std::ref(fe));
    if (!(e.best_fitness >= a.best_fitness && a.best_fitness >= g.best_fitness)) {
      return fmt::format("seed {}: exhaustive {} alg1 {} greedy {}", seed, e.best_fitness, a.best_fitness,
                         g.best_fitness);
    }
    if (e.best_fitness > a.best_fitness) ++strict;
    for (const auto* f : {&fa, &fg, &fe}) {
      if (f->max_calls_per_configuration() > 1) return fmt::format("seed {}: a configuration was evaluated twice", seed);
    }
  }
  if (strict == 0) return "no instance with exhaustive strictly better than alg1";
  return {};
}

std::string spearman_vs_oracle() {
  std::mt19937_64 rng(2024);
  double worst = 0;
  int with_ties = 0;
  for (int v = 0; v < 1000; ++v) {
    std::uniform_int_distribution<int> len(2, 300);
    const auto n = static_cast<std::size_t>(len(rng));
    std::vector<double> x(n), y(n);
    // half the vectors draw from a few levels, so ties are common
    const bool discrete = v % 2 == 0;
    std::uniform_int_distribution<int> level(0, 6);
    std::normal_distribution<double> normal(0, 1);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = discrete ? level(rng) : normal(rng);
      y[i] = discrete ? level(rng) : 0.5 * x[i] + normal(rng);
    }
    if (std::set<double>(x.begin(), x.end()).size() < n) ++with_ties;
    const double expected = oracle_spearman(x, y);
    if (!std::isfinite(expected)) continue;  // constant input, undefined
    worst = std::max(worst, std::abs(spearman(x, y) - expected));
  }
  if (with_ties < 400) return fmt::format("only {} vectors with ties", with_ties);
  if (worst > 1e-12) return fmt::format("max abs difference {:.3e}", worst);
  return {};
}

std::string gradient_check() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal(0.0, 0.5);
  double worst = 0, loss_gap = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 5 + trial % 20, k = 1 + trial % 15;
    std::vector<double> w(static_cast<std::size_t>(dim)), c(w.size()), neg(w.size() * static_cast<std::size_t>(k));
    for (auto* v : {&w, &c, &neg}) {
      for (double& x : *v) x = normal(rng);
    }
    std::vector<double> gw(w.size()), gc(c.size()), gn(neg.size());
    pair_gradient<double>(w, c, neg, gw, gc, gn);
    std::vector<double> all = gw;
    all.insert(all.end(), gc.begin(), gc.end());
    all.insert(all.end(), gn.begin(), gn.end());
    worst = std::max(worst, max_gradient_error(w, c, neg, all));
    const long double oracle = oracle_pair_loss({w.begin(), w.end()}, {c.begin(), c.end()}, {neg.begin(), neg.end()});
    loss_gap = std::max(loss_gap, static_cast<double>(std::abs(pair_loss<double>(w, c, neg) - oracle)));
  }
  if (loss_gap > 1e-12) return fmt::format("loss differs from the oracle by {:.3e}", loss_gap);
  if (worst >= 1e-5) return fmt::format("max relative error {:.3e}", worst);
  return {};
}

std::string planted_clusters(std::string& detail) {
  std::vector<std::string> gaps;
  int passed = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto corpus = planted_corpus(seed, 50000);
    MemoryPairSource src;
    for (const auto& [w, c] : corpus.pairs) src.add(w, c);
    TrainerConfig config;
    config.dim = 25;
    config.negatives = 5;
    config.epochs = 5;
    config.min_count = 1;
    config.subsample = 0;
    config.seed = seed;
    config.workers = 1;
    const auto result = train(src, config);
    const double gap = cluster_gap(result.embeddings.words, corpus);
    gaps.push_back(fmt::format("{:.3f}", gap));
    if (gap >= 0.2) ++passed;
  }
  detail = "gaps " + fmt::format("{}", fmt::join(gaps, " "));
  if (passed != 5) return fmt::format("{}/5 seeds reached 0.2", passed);
  return {};
}

struct SmokeRun {
  std::string report;
  BagManifest manifest;
  fs::path bag_dir;
};

SmokeRun run_smoke(const fs::path& work_dir) {
  const ExperimentConfig config = smoke_config(work_dir);
  const auto outcome = cmd_search(config);
  return {outcome.report, BagManifest::load(config.bag_dir() / kManifestFile), config.bag_dir()};
}

std::string end_to_end(const TempDir& dir, SmokeRun& first) {
  const fs::path work = dir / "work";
  first = run_smoke(work);
  const std::string on_disk = read_file(work / "search" / "report.tsv");
  if (on_disk != first.report) return "report.tsv differs from the returned report";
  const SmokeRun cached = run_smoke(work);
  if (cached.report != first.report) return "rerun with a warm cache changed the report";
  fs::remove_all(work / "cache");
  fs::remove_all(work / "bags");
  const SmokeRun fresh = run_smoke(work);
  if (fresh.report != first.report) return "report changed after deleting the cache";
  for (const char* cls : {"A\t", "V\t", "N\t"}) {
    if (first.report.find(std::string("\n") + cls + "best\t") == std::string::npos) {
      return std::string("no best row for class ") + cls[0];
    }
  }
  return {};
}

std::string pair_additivity(const SmokeRun& smoke) {
  if (smoke.report.empty()) return "no smoke report to check";
  // manifest counts against the bag files themselves
  for (const auto& [bag, n] : smoke.manifest.counts) {
    std::ifstream in(bag_file_path(smoke.bag_dir, bag));
    std::uint64_t lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    if (lines != n) return fmt::format("bag {}: manifest {} but {} lines on disk", bag, n, lines);
  }
  std::istringstream rows(smoke.report);
  std::string line;
  std::getline(rows, line);
  std::size_t checked = 0;
  while (std::getline(rows, line)) {
    std::vector<std::string> f;
    std::istringstream cols(line);
    for (std::string x; std::getline(cols, x, '\t');) f.push_back(x);
    if (f.size() != 8) return "malformed report row: " + line;
    if (f[3] == "-") continue;
    const Configuration c = Configuration::parse(f[3]);
    std::uint64_t sum = 0;
    for (const auto& bag : c.bags()) sum += smoke.manifest.counts.at(bag);
    if (std::stoull(f[7]) != sum) return fmt::format("{}: reported {} pairs, bags sum to {}", f[3], f[7], sum);
    ++checked;
  }
  if (checked == 0) return "report has no configuration rows";
  return {};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  TempDir dir;
  SmokeRun smoke;
  std::string planted_detail;

  const std::vector<Criterion> criteria = {
      {"extraction golden contexts", 1.0, extraction_golden},
      {"search space sizes", 0, search_space_sizes},
      {"verb pool at threshold 0.2", 0, verb_pool},
      {"alg1 adjective walkthrough", 1.0, adjective_walkthrough},
      {"strategy ordering on 200 landscapes", 30.0, strategy_ordering},
      {"spearman vs rank oracle", 10.0, spearman_vs_oracle},
      {"SGNS gradient check", 10.0, gradient_check},
      {"SGNS planted clusters, 5 seeds", 120.0, [&] { return planted_clusters(planted_detail); }},
      {"end-to-end smoke search", 300.0, [&] { return end_to_end(dir, smoke); }},
      {"pair-count additivity", 0, [&] { return pair_additivity(smoke); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string problem;
    try {
      problem = c.check();
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (problem.empty() && c.budget_seconds > 0 && seconds > c.budget_seconds) {
      problem = fmt::format("took {:.2f}s, budget {:.0f}s", seconds, c.budget_seconds);
    }
    const bool ok = problem.empty();
    if (!ok) ++failures;
    std::string line = fmt::format("{} {:<40} {:8.3f}s", ok ? "PASS" : "FAIL", c.name, seconds);
    if (!ok) line += "  " + problem;
    if (ok && &c == &criteria[7] && !planted_detail.empty()) line += "  " + planted_detail;
    std::cout << line << std::endl;
  }
  std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures),
                           criteria.size());
  return failures == 0 ? 0 : 1;
}
