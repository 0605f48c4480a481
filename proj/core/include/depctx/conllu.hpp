#pragma once

// Streaming reader for dependency-annotated corpora in CoNLL-U layout.
//
// Only the basic tree is kept: ID, FORM, LEMMA, UPOS, HEAD and DEPREL.
// Multiword range lines (ID "3-4") and empty nodes (ID "5.1") are dropped
// while parsing. Forms are lowercased; lemmas and tags are kept verbatim.

#include <cstddef>
#include <iosfwd>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depctx/error.hpp"

namespace depctx {

struct Token {
  int index = 0;  // 1-based position in the sentence
  std::string form;
  std::string lemma;
  std::string upos;
  int head = 0;  // 0 = root
  std::string deprel;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  // Token at 1-based position `index`.
  const Token& at(int index) const { return tokens.at(static_cast<std::size_t>(index - 1)); }

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

enum class ErrorMode {
  kSkipSentence,  // drop the offending block, count it, keep going
  kAbort,         // throw ConlluParseError
};

struct ParseIssue {
  std::size_t line = 0;  // 1-based line number in the input
  std::string message;
};

class ConlluParseError : public FormatError {
 public:
  ConlluParseError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConlluReader {
 public:
  explicit ConlluReader(std::istream& in, ErrorMode mode = ErrorMode::kSkipSentence);

  // Next well-formed sentence, or nullopt at end of input.
  std::optional<Sentence> next();

  std::size_t skipped_sentences() const { return skipped_; }
  std::size_t sentences_read() const { return yielded_; }
  // The first kMaxRecordedIssues problems; skipped_sentences() has the total.
  const std::vector<ParseIssue>& issues() const { return issues_; }

  static constexpr std::size_t kMaxRecordedIssues = 100;

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Sentence;
    using difference_type = std::ptrdiff_t;
    using pointer = const Sentence*;
    using reference = const Sentence&;

    iterator() = default;
    explicit iterator(ConlluReader* reader) : reader_(reader) { ++*this; }

    reference operator*() const { return *current_; }
    pointer operator->() const { return &*current_; }
    iterator& operator++() {
      current_ = reader_->next();
      if (!current_) reader_ = nullptr;
      return *this;
    }
    void operator++(int) { ++*this; }
    friend bool operator==(const iterator& a, const iterator& b) { return a.reader_ == b.reader_; }

   private:
    ConlluReader* reader_ = nullptr;
    std::optional<Sentence> current_;
  };

  iterator begin() { return iterator(this); }
  iterator end() { return iterator(); }

 private:
  // Parses one block of lines; throws ConlluParseError on the first problem.
  Sentence parse_block(const std::vector<std::pair<std::size_t, std::string>>& lines) const;
  void record(const ConlluParseError& e);

  std::istream& in_;
  ErrorMode mode_;
  std::size_t line_no_ = 0;
  std::size_t skipped_ = 0;
  std::size_t yielded_ = 0;
  std::vector<ParseIssue> issues_;
};

// Reads every sentence of `text`; convenience for small inputs and tests.
std::vector<Sentence> parse_conllu(std::string_view text, ErrorMode mode = ErrorMode::kAbort);

// Writes a sentence as a CoNLL-U block (10 columns, "_" for unused fields)
// followed by a blank line.
void write_conllu(std::ostream& out, const Sentence& sentence);
std::string to_conllu(const Sentence& sentence);

// Lowercases ASCII plus the Latin-1 Supplement, Greek and Cyrillic capital
// ranges of a UTF-8 string. Other code points pass through unchanged.
std::string lowercase_utf8(std::string_view text);

// Checks the Token and Sentence invariants. Returns the first violation,
// or nullopt when the sentence is valid.
std::optional<std::string> validate_sentence(const Sentence& sentence);

}  // namespace depctx
