#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace depctx {

// The thirteen individual context bags used throughout.
inline const std::vector<std::string>& standard_bags() {
  static const std::vector<std::string> bags = {
      "subj", "obj",  "comp", "nummod", "appos",    "nmod",   "acl",
      "amod", "prep", "adv",  "compound", "conjlr", "conjll"};
  return bags;
}

enum class LabelAction {
  kBag,           // pairs go to LabelTarget::bag
  kDiscard,       // arc produces no pairs
  kCoordination,  // routed to the conjlr / conjll extractor
};

struct LabelTarget {
  LabelAction action = LabelAction::kDiscard;
  std::string bag;  // set when action == kBag

  bool discarded() const { return action == LabelAction::kDiscard; }
  friend bool operator==(const LabelTarget&, const LabelTarget&) = default;
};

struct MappingRule {
  std::string pattern;  // exact label, "prefix*", or "*"
  LabelTarget target;

  bool matches(std::string_view deprel) const;
};

// Ordered deprel -> bag rules; the first matching rule wins and the last
// rule must be the "*" catch-all.
//
// Text form, one rule per line, '#' starts a comment:
//
//   dobj     obj
//   prep:*   prep
//   conj     @coordination
//   punct    DISCARD
//   *        DISCARD
class BagMappingTable {
 public:
  // Rules equivalent to data/bag_mapping.tsv.
  static const BagMappingTable& defaults();
  // Throws ConfigError on syntax errors, a missing catch-all, or rules
  // after the catch-all.
  static BagMappingTable parse(std::string_view text);
  static BagMappingTable load(const std::filesystem::path& path);

  LabelTarget map(std::string_view deprel) const;
  bool is_coordination(std::string_view deprel) const {
    return map(deprel).action == LabelAction::kCoordination;
  }

  // Sorted bag labels the table can produce; coordination expands to
  // conjlr and conjll. DISCARD is not listed.
  std::vector<std::string> image() const;

  const std::vector<MappingRule>& rules() const { return rules_; }
  // Normalised text, stable across whitespace and comment edits.
  std::string to_text() const;

 private:
  explicit BagMappingTable(std::vector<MappingRule> rules) : rules_(std::move(rules)) {}
  std::vector<MappingRule> rules_;
};

inline LabelTarget map_label(std::string_view deprel, const BagMappingTable& table) {
  return table.map(deprel);
}

}  // namespace depctx
