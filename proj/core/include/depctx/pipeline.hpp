#pragma once

// Orchestration behind the CLI subcommands: extraction with content-hash
// caching, training a configuration, and the cross-validated search with
// its report.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "depctx/bag_store.hpp"
#include "depctx/evaluation.hpp"
#include "depctx/experiment.hpp"
#include "depctx/fitness_cache.hpp"
#include "depctx/search.hpp"

namespace depctx {

struct ExtractOutcome {
  BagManifest manifest;
  bool cache_hit = false;
};

// Writes the bag files for the experiment's corpora into bag_dir(). A
// complete bag directory whose manifest carries the same input hash is
// reused as-is.
ExtractOutcome cmd_extract(const ExperimentConfig& config);

// Identity of the corpora as seen by the extractor: path, size, mtime.
std::string corpus_fingerprint(const std::vector<std::filesystem::path>& corpora);

// Trains embeddings for one configuration over the extracted bags.
TrainResult cmd_train(const ExperimentConfig& config, const Configuration& configuration);

// One half of a class subset, used as dev or test fold.
struct Split {
  std::string name;  // "<class>/a" or "<class>/b"
  ClassFilter filter;
  std::vector<std::size_t> indices;
};

struct SplitScore {
  double rho = 0.0;  // -inf when undefined
  std::size_t n_scored = 0;
  std::size_t n_total = 0;
};

struct ScoredConfiguration {
  std::map<std::string, SplitScore> by_split;
  double wall_seconds = 0.0;
  std::uint64_t pairs = 0;
};

// Produces fitness for a configuration on every split at once. The default
// implementation trains SGNS and evaluates; tests inject synthetic oracles.
class ConfigurationScorer {
 public:
  virtual ~ConfigurationScorer() = default;
  virtual ScoredConfiguration score(const Configuration& configuration,
                                    std::span<const Split> splits) = 0;
};

class TrainingScorer : public ConfigurationScorer {
 public:
  TrainingScorer(const ExperimentConfig& config, BagManifest manifest, WordPairDataset dataset);
  ScoredConfiguration score(const Configuration& configuration,
                            std::span<const Split> splits) override;

 private:
  const ExperimentConfig& config_;
  BagManifest manifest_;
  WordPairDataset dataset_;
};

// Content hash of the dataset entries.
std::string dataset_hash(const WordPairDataset& dataset);

// Cache key prefix: extraction input hash, trainer hash, dataset and fold seed.
std::string experiment_hash(const ExperimentConfig& config, const BagManifest& manifest,
                            const std::string& dataset_hash);

struct FoldOutcome {
  std::string class_name;
  std::string dev_fold;  // "a" | "b"
  bool feasible = true;
  std::map<std::string, double> bag_fitness;
  std::vector<std::string> pool;
  std::optional<Configuration> best;
  double dev_rho = 0.0;
  double test_rho = 0.0;
  std::uint64_t pairs = 0;
  SearchTrace trace;
};

struct SearchOutcome {
  std::string experiment;
  std::vector<FoldOutcome> folds;
  std::string report;  // the bytes written to report.tsv
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;  // configurations actually scored
};

// Runs extraction (cached), then per selected class: fold split, pool
// construction, the configured search strategy and test-fold scoring.
// Writes traces and report.tsv under work_dir/search. When `scorer` is
// null, a TrainingScorer is used.
SearchOutcome cmd_search(const ExperimentConfig& config, ConfigurationScorer* scorer = nullptr);

struct ReportRow {
  std::string configuration;
  double rho_a = 0.0;
  double rho_b = 0.0;
  double mean_rho = 0.0;
  std::uint64_t pairs = 0;
  double wall_seconds = 0.0;
};

// Rows for every configuration cached under `experiment` for `class_name`
// (optionally only those in `trace`), sorted by mean rho descending, then
// canonical form.
std::vector<ReportRow> report_rows(const FitnessCache& cache, const std::string& experiment,
                                   const std::string& class_name, const BagManifest& manifest,
                                   const SearchTrace* trace = nullptr);

// Tab-separated table of report_rows. Wall time is only included with
// `include_timing`, since it would make the output nondeterministic.
std::string cmd_report(const FitnessCache& cache, const std::string& experiment,
                       const std::string& class_name, const BagManifest& manifest,
                       const SearchTrace* trace = nullptr, bool include_timing = false);

// Reads a trace written by cmd_search back in.
SearchTrace load_trace(const std::filesystem::path& path);

std::string format_rho(double rho);

}  // namespace depctx
