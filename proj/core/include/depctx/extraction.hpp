#pragma once

// Typed (word, context) pair extraction from parsed sentences.
//
// Dependency contexts: each kept arc h --r--> m yields (h, m_r) and
// (m, h_r-1), both filed under the bag the mapping table assigns to r.
// Coordination arcs are handled separately (conjlr / conjll), and the
// window baselines BOW and POSIT ignore the tree altogether.

#include <string>
#include <string_view>
#include <vector>

#include "depctx/bag_table.hpp"
#include "depctx/conllu.hpp"

namespace depctx {

struct Arc {
  int head = 0;       // 1-based
  int dependent = 0;  // 1-based
  std::string label;

  friend bool operator==(const Arc&, const Arc&) = default;
};

// A sentence reduced to its forms plus an explicit arc list. Collapsing
// removes arcs, which the head-per-token Sentence model cannot express.
// The root arc is never listed.
struct ArcSentence {
  std::vector<std::string> forms;  // forms[i] is token i + 1
  std::vector<Arc> arcs;

  const std::string& form(int index) const { return forms.at(static_cast<std::size_t>(index - 1)); }
};

ArcSentence to_arc_sentence(const Sentence& sentence);

struct CollapseOptions {
  // Also collapse obl + case (UD v2 corpora).
  bool include_obl = false;
};

// For every nmod arc h -> m where m has `case` dependents, drops the case
// arcs and relabels h -> m as "prep:" + form of the linearly first case
// dependent. Everything else is left alone.
ArcSentence collapse_prepositions(const Sentence& sentence, CollapseOptions options = {});

enum class Direction { kNormal, kInverse };

struct DependencyPair {
  std::string word;
  std::string context_token;
  std::string relation;  // raw relation ("nsubj", "prep:with", "+2"); empty for BOW
  std::string bag;
  Direction direction = Direction::kNormal;

  // "scientist_nsubj", "discovers_dobj-1", "with_+2", "stars" (BOW)
  std::string context() const;
  // Context as written to bag files: prep:X relations become "prep".
  std::string file_context() const;

  friend bool operator==(const DependencyPair&, const DependencyPair&) = default;
};

enum class ConjVariant { kConjLR, kConjLL, kBoth };

std::string_view to_string(ConjVariant variant);
ConjVariant parse_conj_variant(std::string_view text);  // "conjlr" | "conjll" | "both"

inline constexpr std::string_view kBowBag = "bow";
inline constexpr std::string_view kPositBag = "posit";

struct ExtractionConfig {
  int window = 2;  // BOW / POSIT window
  ConjVariant conj_variant = ConjVariant::kBoth;
  bool collapse_prepositions = true;
  bool collapse_obl = false;
  bool baselines = false;  // also write bow and posit files

  void validate() const;  // throws ConfigError
};

std::vector<DependencyPair> extract_deps_pairs(const ArcSentence& sentence,
                                               const BagMappingTable& table);

std::vector<DependencyPair> extract_conj_pairs(
    const ArcSentence& sentence, ConjVariant variant,
    const BagMappingTable& table = BagMappingTable::defaults());

std::vector<DependencyPair> extract_bow_pairs(const Sentence& sentence, int window);
std::vector<DependencyPair> extract_posit_pairs(const Sentence& sentence, int window);

// All pairs the configuration asks for: dependency bags, coordination and,
// if enabled, the window baselines.
std::vector<DependencyPair> extract_sentence(const Sentence& sentence,
                                             const BagMappingTable& table,
                                             const ExtractionConfig& config);

}  // namespace depctx
