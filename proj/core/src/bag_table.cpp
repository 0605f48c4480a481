#include "depctx/bag_table.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "depctx/error.hpp"

namespace depctx {
namespace {

constexpr std::string_view kDiscard = "DISCARD";
constexpr std::string_view kCoordination = "@coordination";

// Keep in sync with data/bag_mapping.tsv; a test checks they agree.
constexpr std::string_view kDefaultRules = R"(
nsubj subj
nsubjpass subj
nsubj:pass subj
dobj obj
iobj obj
obj obj
ccomp comp
xcomp comp
advmod adv
advcl adv
acl acl
acl:relcl acl
prep:* prep
nmod nmod
nmod:* nmod
obl nmod
obl:* nmod
amod amod
appos appos
nummod nummod
compound compound
compound:prt compound
name compound
mwe compound
flat compound
fixed compound
conj @coordination
punct DISCARD
goeswith DISCARD
cc DISCARD
det DISCARD
mark DISCARD
aux DISCARD
auxpass DISCARD
cop DISCARD
case DISCARD
expl DISCARD
dep DISCARD
root DISCARD
* DISCARD
)";

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string target_text(const LabelTarget& t) {
  switch (t.action) {
    case LabelAction::kBag:
      return t.bag;
    case LabelAction::kDiscard:
      return std::string(kDiscard);
    case LabelAction::kCoordination:
      return std::string(kCoordination);
  }
  return {};
}

}  // namespace

bool MappingRule::matches(std::string_view deprel) const {
  if (pattern == "*") return true;
  if (!pattern.empty() && pattern.back() == '*') {
    return deprel.starts_with(std::string_view(pattern).substr(0, pattern.size() - 1));
  }
  return deprel == pattern;
}

const BagMappingTable& BagMappingTable::defaults() {
  static const BagMappingTable table = parse(kDefaultRules);
  return table;
}

BagMappingTable BagMappingTable::parse(std::string_view text) {
  std::vector<MappingRule> rules;
  bool saw_catch_all = false;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream fields{std::string(line)};
    std::string pattern, target, extra;
    fields >> pattern >> target;
    if (target.empty() || (fields >> extra)) {
      throw ConfigError(fmt::format("bag mapping line {}: expected '<pattern> <target>'", line_no));
    }
    if (saw_catch_all) {
      throw ConfigError(fmt::format("bag mapping line {}: rule after the '*' catch-all", line_no));
    }
    MappingRule rule{pattern, {}};
    if (target == kDiscard) {
      rule.target.action = LabelAction::kDiscard;
    } else if (target == kCoordination) {
      rule.target.action = LabelAction::kCoordination;
    } else {
      if (target == "conj" || target.find('+') != std::string::npos || target.front() == '@') {
        throw ConfigError(fmt::format("bag mapping line {}: invalid bag name '{}'", line_no, target));
      }
      rule.target = {LabelAction::kBag, target};
    }
    if (pattern == "*") saw_catch_all = true;
    rules.push_back(std::move(rule));
  }
  if (!saw_catch_all) throw ConfigError("bag mapping table needs a final '*' catch-all rule");
  return BagMappingTable(std::move(rules));
}

BagMappingTable BagMappingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open bag mapping table: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

LabelTarget BagMappingTable::map(std::string_view deprel) const {
  for (const auto& rule : rules_) {
    if (rule.matches(deprel)) return rule.target;
  }
  return {};  // unreachable: the catch-all always matches
}

std::vector<std::string> BagMappingTable::image() const {
  std::set<std::string> bags;
  for (const auto& rule : rules_) {
    if (rule.target.action == LabelAction::kBag) {
      bags.insert(rule.target.bag);
    } else if (rule.target.action == LabelAction::kCoordination) {
      bags.insert("conjlr");
      bags.insert("conjll");
    }
  }
  return {bags.begin(), bags.end()};
}

std::string BagMappingTable::to_text() const {
  std::string out;
  for (const auto& rule : rules_) out += fmt::format("{}\t{}\n", rule.pattern, target_text(rule.target));
  return out;
}

}  // namespace depctx
