#include "depctx/configuration.hpp"

#include <algorithm>

#include "depctx/error.hpp"

namespace depctx {
namespace {

constexpr std::string_view kConj = "conj";

std::string make_canonical(const std::vector<std::string>& bags) {
  std::vector<std::string> parts;
  const bool both_conj = std::binary_search(bags.begin(), bags.end(), "conjll") &&
                         std::binary_search(bags.begin(), bags.end(), "conjlr");
  for (const auto& b : bags) {
    if (both_conj && (b == "conjll" || b == "conjlr")) continue;
    parts.push_back(b);
  }
  if (both_conj) parts.emplace_back(kConj);
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += '+';
    out += p;
  }
  return out;
}

}  // namespace

Configuration::Configuration(std::vector<std::string> bags) : bags_(std::move(bags)) {
  if (bags_.empty()) throw ConfigError("a configuration needs at least one context bag");
  for (const auto& b : bags_) {
    if (b.empty() || b.find('+') != std::string::npos || b == kConj) {
      throw ConfigError("invalid context bag label '" + b + "'");
    }
  }
  std::sort(bags_.begin(), bags_.end());
  bags_.erase(std::unique(bags_.begin(), bags_.end()), bags_.end());
  canonical_ = make_canonical(bags_);
}

Configuration Configuration::parse(std::string_view text) {
  std::vector<std::string> bags;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto plus = text.find('+', start);
    if (plus == std::string_view::npos) plus = text.size();
    std::string_view part = text.substr(start, plus - start);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    if (part == kConj) {
      bags.emplace_back("conjlr");
      bags.emplace_back("conjll");
    } else if (!part.empty()) {
      bags.emplace_back(part);
    } else if (!text.empty()) {
      throw ConfigError("empty bag label in configuration '" + std::string(text) + "'");
    }
    start = plus + 1;
  }
  return Configuration(std::move(bags));
}

bool Configuration::contains(std::string_view bag) const {
  return std::binary_search(bags_.begin(), bags_.end(), bag);
}

Configuration Configuration::without(std::string_view bag) const {
  std::vector<std::string> rest;
  for (const auto& b : bags_) {
    if (b != bag) rest.push_back(b);
  }
  return Configuration(std::move(rest));
}

bool tie_break_less(const Configuration& a, const Configuration& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a.canonical() < b.canonical();
}

}  // namespace depctx
