#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "depctx/pair_source.hpp"

namespace depctx {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
};

// Token -> dense id with raw counts. Ids are contiguous from 0 and ordered
// by descending count, ties by token.
class Vocabulary {
 public:
  std::optional<std::uint32_t> find(std::string_view token) const;
  const std::string& token(std::uint32_t id) const { return tokens_[id]; }
  std::uint64_t count(std::uint32_t id) const { return counts_[id]; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  // Keeps entries with count >= min_count.
  static Vocabulary from_counts(
      const std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>>& counts,
      std::uint64_t min_count);

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>> index_;
};

struct PairVocabulary {
  Vocabulary words;
  Vocabulary contexts;
};

// Counts both sides over one pass of `pairs` and drops entries below
// `min_count`. Throws ConfigError if either side ends up empty.
PairVocabulary build_vocab(PairSource& pairs, std::uint64_t min_count);

}  // namespace depctx
