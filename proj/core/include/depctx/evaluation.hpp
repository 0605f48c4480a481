#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "depctx/embeddings.hpp"

namespace depctx {

struct Cosine {
  double value = 0.0;
  bool zero_operand = false;  // one side was the zero vector; value is 0
};

// Throws std::invalid_argument on a dimension mismatch.
Cosine cosine(std::span<const float> u, std::span<const float> v);
Cosine cosine(std::span<const double> u, std::span<const double> v);

// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

double pearson(std::span<const double> xs, std::span<const double> ys);

// Pearson correlation of average ranks. Throws UndefinedCorrelation for
// fewer than two points or a constant sequence, std::invalid_argument on a
// length mismatch.
double spearman(std::span<const double> xs, std::span<const double> ys);

enum class WordClass { kAdjective, kVerb, kNoun };

char to_char(WordClass c);                    // 'A' | 'V' | 'N'
WordClass parse_word_class(std::string_view);  // throws FormatError

// A class selection: one of A/V/N or every class (ALL).
struct ClassFilter {
  std::optional<WordClass> only;

  static ClassFilter all() { return {}; }
  static ClassFilter of(WordClass c) { return {c}; }
  static ClassFilter parse(std::string_view text);  // "A" | "V" | "N" | "ALL"
  bool accepts(WordClass c) const { return !only || *only == c; }
  std::string name() const;
};

struct WordPair {
  std::string word1;
  std::string word2;
  double gold = 0.0;
  WordClass word_class = WordClass::kNoun;
};

struct WordPairDataset {
  std::vector<WordPair> entries;

  // Tab-separated "word1 word2 score class" with a header line. Words are
  // lowercased. Throws FormatError naming the line.
  static WordPairDataset parse(std::string_view text);
  static WordPairDataset load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  // Indices of entries in the class selection, in file order.
  std::vector<std::size_t> indices(ClassFilter filter) const;
};

// Converts a SimLex-999 distribution file (header, then word1 word2 POS
// SimLex999 ...) into the dataset format.
WordPairDataset convert_simlex(std::string_view simlex_text);

struct EvalResult {
  double rho = 0.0;
  std::size_t n_scored = 0;
  std::size_t n_total = 0;
};

// Spearman rho between gold scores and cosines over the selected entries.
// Pairs with an out-of-vocabulary word count towards n_total only. An
// empty `subset` means every entry that passes `filter`; otherwise only the
// listed indices that pass it. Throws UndefinedCorrelation when fewer than
// two pairs are scored.
EvalResult evaluate(const VectorTable& vectors, const WordPairDataset& dataset,
                    ClassFilter filter, std::span<const std::size_t> subset = {});

struct FoldSplit {
  std::vector<std::size_t> fold_a;  // ceil(n/2) dataset indices, sorted
  std::vector<std::size_t> fold_b;  // floor(n/2), sorted

  const std::vector<std::size_t>& fold(int which) const { return which == 0 ? fold_a : fold_b; }
};

// Random halving of the class subset, deterministic in `seed`. Throws
// ConfigError if the subset has fewer than two entries.
FoldSplit split_folds(const WordPairDataset& dataset, ClassFilter filter, std::uint64_t seed);

struct ToeflQuestion {
  std::string prompt;
  std::array<std::string, 4> candidates;
  int gold = 0;  // 0-based index into candidates
  std::optional<WordClass> word_class;
};

// Whitespace-separated "prompt c1 c2 c3 c4 gold [class]" lines; gold is
// 0-based. Blank lines and '#' comments are skipped.
std::vector<ToeflQuestion> parse_toefl(std::string_view text);
std::vector<ToeflQuestion> load_toefl(const std::filesystem::path& path);

struct ToeflScore {
  std::size_t correct = 0;
  std::size_t total = 0;
};

struct ToeflResult {
  std::map<std::string, ToeflScore> by_class;  // "A", "V", "N", "?" for untagged
  ToeflScore overall;
};

// Picks the in-vocabulary candidate with the highest cosine to the prompt,
// lowest index on ties. An OOV prompt or all-OOV candidates count as wrong.
ToeflResult toefl_evaluate(const VectorTable& vectors, std::span<const ToeflQuestion> questions);

}  // namespace depctx
