#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

namespace depctx {

struct FitnessRecord {
  std::string experiment;     // hash of everything that defines the experiment
  std::string configuration;  // canonical form
  std::string fold;           // e.g. "A/dev-a", "N/full"
  double rho = 0.0;           // -inf when undefined
  double wall_seconds = 0.0;  // training time of the model behind rho
  std::uint64_t pairs = 0;    // training pairs of the configuration
  std::size_t n_scored = 0;
  std::size_t n_total = 0;
};

// Persistent (experiment, configuration, fold) -> rho map backed by an
// append-only tab-separated file. Each key is written once; readers share
// a lock, inserts take it exclusively.
class FitnessCache {
 public:
  // Loads `path` if it exists. Duplicate keys keep the first record;
  // a torn last line is ignored.
  explicit FitnessCache(std::filesystem::path path);

  std::optional<FitnessRecord> lookup(const std::string& experiment, const std::string& configuration,
                                      const std::string& fold) const;
  // Appends and returns true, or returns false if the key already exists.
  bool insert(const FitnessRecord& record);

  std::vector<FitnessRecord> records() const;
  std::vector<FitnessRecord> records_for(const std::string& experiment) const;
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

  static std::string format_record(const FitnessRecord& r);
  static std::optional<FitnessRecord> parse_record(const std::string& line);

 private:
  using Key = std::tuple<std::string, std::string, std::string>;
  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::map<Key, FitnessRecord> records_;
  std::vector<Key> order_;
  std::ofstream out_;
};

}  // namespace depctx
