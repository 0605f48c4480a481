#include "depctx/extraction.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "depctx/error.hpp"

namespace depctx {
namespace {

constexpr std::string_view kPrepPrefix = "prep:";

DependencyPair make_pair(const std::string& word, const std::string& context_token,
                         const std::string& relation, const std::string& bag, Direction direction) {
  return DependencyPair{word, context_token, relation, bag, direction};
}

}  // namespace

std::string DependencyPair::context() const {
  if (relation.empty()) return context_token;
  std::string out = context_token;
  out += '_';
  out += relation;
  if (direction == Direction::kInverse) out += "-1";
  return out;
}

std::string DependencyPair::file_context() const {
  if (!std::string_view(relation).starts_with(kPrepPrefix)) return context();
  std::string out = context_token + "_prep";
  if (direction == Direction::kInverse) out += "-1";
  return out;
}

std::string_view to_string(ConjVariant variant) {
  switch (variant) {
    case ConjVariant::kConjLR:
      return "conjlr";
    case ConjVariant::kConjLL:
      return "conjll";
    case ConjVariant::kBoth:
      return "both";
  }
  return "both";
}

ConjVariant parse_conj_variant(std::string_view text) {
  if (text == "conjlr") return ConjVariant::kConjLR;
  if (text == "conjll") return ConjVariant::kConjLL;
  if (text == "both") return ConjVariant::kBoth;
  throw ConfigError(fmt::format("unknown conj variant '{}' (expected conjlr, conjll or both)", text));
}

void ExtractionConfig::validate() const {
  if (window < 1) throw ConfigError(fmt::format("window must be >= 1, got {}", window));
}

ArcSentence to_arc_sentence(const Sentence& sentence) {
  ArcSentence out;
  out.forms.reserve(sentence.size());
  for (const Token& t : sentence.tokens) {
    out.forms.push_back(t.form);
    if (t.head != 0) out.arcs.push_back({t.head, t.index, t.deprel});
  }
  return out;
}

ArcSentence collapse_prepositions(const Sentence& sentence, CollapseOptions options) {
  const auto n = sentence.size();
  auto collapsible = [&](const std::string& deprel) {
    return deprel == "nmod" || (options.include_obl && deprel == "obl");
  };

  // first_case[m] = linearly first `case` dependent of token m, 0 if none
  std::vector<int> first_case(n + 1, 0);
  for (const Token& t : sentence.tokens) {
    if (t.deprel != "case" || t.head == 0) continue;
    const Token& head = sentence.at(t.head);
    if (head.head == 0 || !collapsible(head.deprel)) continue;
    auto& slot = first_case[static_cast<std::size_t>(t.head)];
    if (slot == 0 || t.index < slot) slot = t.index;
  }

  ArcSentence out;
  out.forms.reserve(n);
  for (const Token& t : sentence.tokens) {
    out.forms.push_back(t.form);
    if (t.head == 0) continue;
    if (t.deprel == "case" && first_case[static_cast<std::size_t>(t.head)] != 0) continue;
    const int prep = first_case[static_cast<std::size_t>(t.index)];
    if (prep != 0) {
      out.arcs.push_back({t.head, t.index, std::string(kPrepPrefix) + lowercase_utf8(sentence.at(prep).form)});
    } else {
      out.arcs.push_back({t.head, t.index, t.deprel});
    }
  }
  return out;
}

std::vector<DependencyPair> extract_deps_pairs(const ArcSentence& sentence,
                                               const BagMappingTable& table) {
  std::vector<DependencyPair> pairs;
  pairs.reserve(sentence.arcs.size() * 2);
  for (const Arc& arc : sentence.arcs) {
    const LabelTarget target = table.map(arc.label);
    if (target.action != LabelAction::kBag) continue;
    const std::string& head = sentence.form(arc.head);
    const std::string& dep = sentence.form(arc.dependent);
    pairs.push_back(make_pair(head, dep, arc.label, target.bag, Direction::kNormal));
    pairs.push_back(make_pair(dep, head, arc.label, target.bag, Direction::kInverse));
  }
  return pairs;
}

std::vector<DependencyPair> extract_conj_pairs(const ArcSentence& sentence, ConjVariant variant,
                                               const BagMappingTable& table) {
  std::vector<DependencyPair> pairs;
  const bool lr = variant != ConjVariant::kConjLL;
  const bool ll = variant != ConjVariant::kConjLR;
  for (const Arc& arc : sentence.arcs) {
    if (!table.is_coordination(arc.label)) continue;
    const std::string& head = sentence.form(arc.head);
    const std::string& dep = sentence.form(arc.dependent);
    if (lr) {
      pairs.push_back(make_pair(head, dep, arc.label, "conjlr", Direction::kNormal));
      pairs.push_back(make_pair(dep, head, arc.label, "conjlr", Direction::kInverse));
    }
    if (ll) {
      pairs.push_back(make_pair(head, dep, arc.label, "conjll", Direction::kNormal));
      pairs.push_back(make_pair(dep, head, arc.label, "conjll", Direction::kNormal));
    }
  }
  return pairs;
}

namespace {

template <class RelationFn>
std::vector<DependencyPair> window_pairs(const Sentence& sentence, int window, std::string_view bag,
                                         RelationFn relation) {
  if (window < 1) throw ConfigError(fmt::format("window must be >= 1, got {}", window));
  std::vector<DependencyPair> pairs;
  const int n = static_cast<int>(sentence.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - window);
    const int hi = std::min(n - 1, i + window);
    for (int j = lo; j <= hi; ++j) {
      if (j == i) continue;
      pairs.push_back(make_pair(sentence.tokens[static_cast<std::size_t>(i)].form,
                                sentence.tokens[static_cast<std::size_t>(j)].form, relation(j - i),
                                std::string(bag), Direction::kNormal));
    }
  }
  return pairs;
}

}  // namespace

std::vector<DependencyPair> extract_bow_pairs(const Sentence& sentence, int window) {
  return window_pairs(sentence, window, kBowBag, [](int) { return std::string(); });
}

std::vector<DependencyPair> extract_posit_pairs(const Sentence& sentence, int window) {
  return window_pairs(sentence, window, kPositBag, [](int offset) { return fmt::format("{:+d}", offset); });
}

std::vector<DependencyPair> extract_sentence(const Sentence& sentence, const BagMappingTable& table,
                                             const ExtractionConfig& config) {
  const ArcSentence arcs = config.collapse_prepositions
                               ? collapse_prepositions(sentence, {config.collapse_obl})
                               : to_arc_sentence(sentence);
  std::vector<DependencyPair> pairs = extract_deps_pairs(arcs, table);
  auto conj = extract_conj_pairs(arcs, config.conj_variant, table);
  pairs.insert(pairs.end(), std::make_move_iterator(conj.begin()), std::make_move_iterator(conj.end()));
  if (config.baselines) {
    auto bow = extract_bow_pairs(sentence, config.window);
    auto posit = extract_posit_pairs(sentence, config.window);
    pairs.insert(pairs.end(), std::make_move_iterator(bow.begin()), std::make_move_iterator(bow.end()));
    pairs.insert(pairs.end(), std::make_move_iterator(posit.begin()), std::make_move_iterator(posit.end()));
  }
  return pairs;
}

}  // namespace depctx
