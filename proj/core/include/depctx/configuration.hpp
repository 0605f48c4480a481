#pragma once

#include <compare>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace depctx {

// A nonempty set of context bags. The canonical form joins the sorted
// labels with '+', writing "conj" when both conjlr and conjll are members:
// {amod, conjlr, conjll} -> "amod+conj".
class Configuration {
 public:
  // Sorts and deduplicates. Throws ConfigError if `bags` is empty or any
  // label is empty, contains '+', or is the reserved name "conj".
  explicit Configuration(std::vector<std::string> bags);

  // Inverse of canonical(); "conj" expands to conjlr + conjll.
  static Configuration parse(std::string_view text);

  const std::vector<std::string>& bags() const { return bags_; }
  std::size_t size() const { return bags_.size(); }
  const std::string& canonical() const { return canonical_; }
  bool contains(std::string_view bag) const;

  // This configuration with `bag` removed. Throws ConfigError if that
  // would leave it empty.
  Configuration without(std::string_view bag) const;

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.bags_ == b.bags_;
  }
  friend std::strong_ordering operator<=>(const Configuration& a, const Configuration& b) {
    return a.canonical_ <=> b.canonical_;
  }

 private:
  std::vector<std::string> bags_;
  std::string canonical_;
};

// Deterministic tie-break order: fewer bags first, then canonical form.
bool tie_break_less(const Configuration& a, const Configuration& b);

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const {
    return std::hash<std::string>{}(c.canonical());
  }
};

}  // namespace depctx
