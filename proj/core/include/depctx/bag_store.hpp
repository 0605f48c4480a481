#pragma once

// On-disk bag files and the manifest describing them.
//
// Layout of a bag directory:
//   <bag>.pairs     one "word<TAB>context" line per pair
//   manifest.txt    flat key = value file, written last
//   INCOMPLETE      present while extraction is running or after it failed

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "depctx/bag_table.hpp"
#include "depctx/configuration.hpp"
#include "depctx/extraction.hpp"
#include "depctx/pair_source.hpp"

namespace depctx {

inline constexpr std::string_view kManifestFile = "manifest.txt";
inline constexpr std::string_view kIncompleteMarker = "INCOMPLETE";

std::filesystem::path bag_file_path(const std::filesystem::path& dir, std::string_view bag);

// Content hash over everything that changes the bag files for a given corpus.
std::string extraction_config_hash(const ExtractionConfig& config, const BagMappingTable& table);

struct BagManifest {
  std::map<std::string, std::uint64_t> counts;  // bag -> pair count
  std::map<std::string, std::string> params;    // extraction parameters, informational
  std::string config_hash;
  std::string input_hash;  // config hash + corpus fingerprint
  std::uint64_t sentences = 0;
  std::uint64_t skipped_sentences = 0;

  bool has_bag(std::string_view bag) const { return counts.contains(std::string(bag)); }
  // Throws ConfigError naming the bag if it is unknown.
  std::uint64_t count(std::string_view bag) const;
  // Sum of member counts.
  std::uint64_t total(const Configuration& config) const;

  void save(const std::filesystem::path& path) const;
  static BagManifest load(const std::filesystem::path& path);
};

// A bag directory is usable when its manifest exists and no INCOMPLETE
// marker is present.
bool bag_directory_complete(const std::filesystem::path& dir);

// Streams sentences into per-bag files. Construction truncates the files
// and drops an INCOMPLETE marker; finish() writes the manifest and removes
// the marker. A writer destroyed without finish() leaves the marker behind.
class BagWriter {
 public:
  BagWriter(std::filesystem::path out_dir, const BagMappingTable& table, ExtractionConfig config);
  ~BagWriter();
  BagWriter(const BagWriter&) = delete;
  BagWriter& operator=(const BagWriter&) = delete;

  void add(const Sentence& sentence);
  // Extracts `workers` slices of the batch concurrently; lines are written
  // in sentence order, so output bytes do not depend on `workers`.
  void add_batch(std::span<const Sentence> batch, unsigned workers);

  // Folded into the manifest.
  void note_skipped(std::uint64_t n) { skipped_ += n; }
  void set_param(std::string key, std::string value) { params_[std::move(key)] = std::move(value); }
  void set_input_hash(std::string hash) { input_hash_ = std::move(hash); }

  BagManifest finish();

 private:
  void write_pairs(const std::vector<DependencyPair>& pairs);

  std::filesystem::path dir_;
  const BagMappingTable& table_;
  ExtractionConfig config_;
  std::map<std::string, std::ofstream> files_;
  std::map<std::string, std::uint64_t> counts_;
  std::map<std::string, std::string> params_;
  std::string input_hash_;
  std::uint64_t sentences_ = 0;
  std::uint64_t skipped_ = 0;
  bool finished_ = false;
};

// Bag labels the writer produces for `config`.
std::vector<std::string> output_bags(const BagMappingTable& table, const ExtractionConfig& config);

// Pair stream over the concatenation of a configuration's bag files, in
// canonical bag order.
class BagPairStream : public PairSource {
 public:
  BagPairStream(std::vector<std::filesystem::path> files, std::uint64_t expected_pairs);

  void rewind() override;
  bool next(PairView& pair) override;
  std::uint64_t expected_pairs() const { return expected_; }

 private:
  bool open_next_file();

  std::vector<std::filesystem::path> files_;
  std::size_t file_index_ = 0;
  std::unique_ptr<std::ifstream> current_;
  std::string line_;
  std::uint64_t line_no_ = 0;
  std::uint64_t expected_;
};

// Throws ConfigError naming the first bag missing from the manifest.
BagPairStream compose_configuration(const Configuration& config, const BagManifest& manifest,
                                    const std::filesystem::path& bag_dir);

}  // namespace depctx
