#include "depctx/vocabulary.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "depctx/error.hpp"

namespace depctx {

std::optional<std::uint32_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary Vocabulary::from_counts(
    const std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>>& counts,
    std::uint64_t min_count) {
  std::vector<std::pair<const std::string*, std::uint64_t>> kept;
  for (const auto& [token, n] : counts) {
    if (n >= min_count) kept.emplace_back(&token, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return *a.first < *b.first;
  });
  Vocabulary v;
  v.tokens_.reserve(kept.size());
  v.counts_.reserve(kept.size());
  v.index_.reserve(kept.size());
  for (const auto& [token, n] : kept) {
    v.index_.emplace(*token, static_cast<std::uint32_t>(v.tokens_.size()));
    v.tokens_.push_back(*token);
    v.counts_.push_back(n);
  }
  return v;
}

PairVocabulary build_vocab(PairSource& pairs, std::uint64_t min_count) {
  std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>> words, contexts;
  auto bump = [](auto& map, std::string_view token) {
    auto it = map.find(token);
    if (it == map.end()) {
      map.emplace(std::string(token), 1);
    } else {
      ++it->second;
    }
  };
  pairs.rewind();
  PairView pair;
  while (pairs.next(pair)) {
    bump(words, pair.word);
    bump(contexts, pair.context);
  }
  PairVocabulary vocab{Vocabulary::from_counts(words, min_count),
                       Vocabulary::from_counts(contexts, min_count)};
  if (vocab.words.empty() || vocab.contexts.empty()) {
    throw ConfigError(fmt::format(
        "empty vocabulary after min_count={} filtering ({} words, {} contexts kept of {} / {})",
        min_count, vocab.words.size(), vocab.contexts.size(), words.size(), contexts.size()));
  }
  return vocab;
}

}  // namespace depctx
