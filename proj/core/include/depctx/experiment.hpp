#pragma once

// Experiment definitions: a flat, commented "key = value" file.
//
//   # corpus files, comma-separated; relative paths resolve against the
//   # directory of the config file
//   corpus = treebank.conllu
//   dataset = simlex.tsv
//   classes = A,V,N
//   strategy = alg1
//   dim = 300
//
// Every run writes the resolved config (all keys, absolute paths) next to
// its outputs.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depctx/evaluation.hpp"
#include "depctx/extraction.hpp"
#include "depctx/search.hpp"
#include "depctx/sgns.hpp"

namespace depctx {

inline constexpr const char* kCacheDirEnv = "DEPCTX_CACHE_DIR";

enum class CvMode {
  kPerFold,   // search on each fold as dev, score on the other, average
  kFixedDev,  // search once with fold a as dev, score on fold b
};

std::string_view to_string(CvMode mode);
CvMode parse_cv_mode(std::string_view text);  // "per-fold" | "fixed-dev"

struct ExperimentConfig {
  std::vector<std::filesystem::path> corpora;
  std::optional<std::filesystem::path> mapping_table;
  std::filesystem::path work_dir = "depctx-work";
  std::optional<std::filesystem::path> cache_dir;  // default: work_dir / "cache"
  ExtractionConfig extraction;
  TrainerConfig trainer;
  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> toefl;
  std::vector<ClassFilter> classes = {ClassFilter::of(WordClass::kAdjective),
                                      ClassFilter::of(WordClass::kVerb),
                                      ClassFilter::of(WordClass::kNoun)};
  SearchStrategy strategy = SearchStrategy::kAlg1;
  double threshold = 0.2;
  std::uint64_t fold_seed = 1;
  CvMode cv_mode = CvMode::kPerFold;
  bool follow_best_child = false;
  std::size_t exhaustive_max_pool = kDefaultExhaustiveLimit;
  unsigned jobs = 1;             // concurrent training jobs during search
  unsigned extract_workers = 1;  // extraction threads

  // Throws ConfigError on unknown keys or unparsable values. Relative
  // paths are resolved against `base_dir`.
  static ExperimentConfig parse(std::string_view text, const std::filesystem::path& base_dir);
  static ExperimentConfig load(const std::filesystem::path& path);

  // Applies one "key = value" setting.
  void set(std::string_view key, std::string_view value,
           const std::filesystem::path& base_dir = std::filesystem::current_path());

  // Every key, one per line, in a fixed order.
  std::string to_text() const;

  std::filesystem::path bag_dir() const { return work_dir / "bags"; }
  // cache_dir, overridden by $DEPCTX_CACHE_DIR when set.
  std::filesystem::path resolved_cache_dir() const;

  const BagMappingTable& table() const;

  // Checks that referenced inputs exist. Throws ConfigError.
  void validate_inputs(bool need_dataset) const;

 private:
  // Loaded lazily from mapping_table.
  mutable std::optional<BagMappingTable> table_;
};

}  // namespace depctx
