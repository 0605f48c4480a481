#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace depctx {

struct PairView {
  std::string_view word;
  std::string_view context;
};

// A re-iterable stream of (word, context) pairs. Views handed out by
// next() stay valid until the following call.
class PairSource {
 public:
  virtual ~PairSource() = default;
  virtual void rewind() = 0;
  virtual bool next(PairView& pair) = 0;
};

class MemoryPairSource : public PairSource {
 public:
  MemoryPairSource() = default;
  explicit MemoryPairSource(std::vector<std::pair<std::string, std::string>> pairs)
      : pairs_(std::move(pairs)) {}

  void add(std::string word, std::string context) {
    pairs_.emplace_back(std::move(word), std::move(context));
  }
  std::size_t size() const { return pairs_.size(); }

  void rewind() override { pos_ = 0; }
  bool next(PairView& pair) override {
    if (pos_ >= pairs_.size()) return false;
    pair = {pairs_[pos_].first, pairs_[pos_].second};
    ++pos_;
    return true;
  }

 private:
  std::vector<std::pair<std::string, std::string>> pairs_;
  std::size_t pos_ = 0;
};

}  // namespace depctx
