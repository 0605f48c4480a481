#include "depctx/conllu.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace depctx {
namespace {

constexpr std::size_t kColumns = 10;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

char32_t lower_two_byte(char32_t cp) {
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if ((cp >= 0x100 && cp <= 0x12F) || (cp >= 0x132 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) {
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
    return (cp % 2 == 1) ? cp + 1 : cp;
  }
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

}  // namespace

ConlluParseError::ConlluParseError(std::size_t line, const std::string& message)
    : FormatError(fmt::format("line {}: {}", line, message)), line_(line) {}

std::string lowercase_utf8(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c >= 'A' && c <= 'Z') {
      out.push_back(static_cast<char>(c + 32));
    } else if ((c & 0xE0) == 0xC0 && i + 1 < text.size() &&
               (static_cast<unsigned char>(text[i + 1]) & 0xC0) == 0x80) {
      const char32_t cp = (static_cast<char32_t>(c & 0x1F) << 6) |
                          (static_cast<unsigned char>(text[i + 1]) & 0x3F);
      append_utf8(out, lower_two_byte(cp));
      ++i;
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

std::optional<std::string> validate_sentence(const Sentence& sentence) {
  const int n = static_cast<int>(sentence.size());
  if (n == 0) return "sentence has no tokens";
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const Token& t = sentence.tokens[static_cast<std::size_t>(i)];
    if (t.index != i + 1) return fmt::format("token index {} out of sequence (expected {})", t.index, i + 1);
    if (t.head < 0 || t.head > n) return fmt::format("token {} has head {} outside 0..{}", t.index, t.head, n);
    if (t.head == t.index) return fmt::format("token {} is its own head", t.index);
    if (t.deprel.empty()) return fmt::format("token {} has an empty deprel", t.index);
    if (t.head == 0) ++roots;
  }
  if (roots != 1) return fmt::format("expected exactly one root, found {}", roots);
  return std::nullopt;
}

ConlluReader::ConlluReader(std::istream& in, ErrorMode mode) : in_(in), mode_(mode) {}

Sentence ConlluReader::parse_block(
    const std::vector<std::pair<std::size_t, std::string>>& lines) const {
  Sentence sentence;
  for (const auto& [line_no, line] : lines) {
    const auto cols = split_tabs(line);
    if (cols.size() != kColumns) {
      throw ConlluParseError(line_no, fmt::format("expected {} tab-separated columns, found {}",
                                                  kColumns, cols.size()));
    }
    const std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) {
      continue;  // multiword range or empty node
    }
    Token token;
    if (!parse_int(id, token.index)) {
      throw ConlluParseError(line_no, fmt::format("non-numeric ID '{}'", id));
    }
    if (!parse_int(cols[6], token.head)) {
      throw ConlluParseError(line_no, fmt::format("non-numeric HEAD '{}'", cols[6]));
    }
    token.form = lowercase_utf8(cols[1]);
    token.lemma = std::string(cols[2]);
    token.upos = std::string(cols[3]);
    token.deprel = std::string(cols[7]);
    const std::size_t expected = sentence.tokens.size() + 1;
    if (token.index != static_cast<int>(expected)) {
      throw ConlluParseError(line_no, fmt::format("token ID {} out of sequence (expected {})",
                                                  token.index, expected));
    }
    sentence.tokens.push_back(std::move(token));
  }
  if (auto problem = validate_sentence(sentence)) {
    throw ConlluParseError(lines.front().first, *problem);
  }
  return sentence;
}

void ConlluReader::record(const ConlluParseError& e) {
  ++skipped_;
  if (issues_.size() < kMaxRecordedIssues) issues_.push_back({e.line(), e.what()});
  if (skipped_ <= 10) spdlog::warn("skipping malformed CoNLL-U sentence: {}", e.what());
}

std::optional<Sentence> ConlluReader::next() {
  std::vector<std::pair<std::size_t, std::string>> block;
  std::string line;
  while (true) {
    bool more = static_cast<bool>(std::getline(in_, line));
    if (more) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
    }
    if (!more || is_blank(line)) {
      if (!block.empty()) {
        try {
          Sentence s = parse_block(block);
          ++yielded_;
          return s;
        } catch (const ConlluParseError& e) {
          if (mode_ == ErrorMode::kAbort) throw;
          record(e);
          block.clear();
        }
      }
      if (!more) return std::nullopt;
      continue;
    }
    if (line.front() == '#') continue;
    block.emplace_back(line_no_, line);
  }
}

std::vector<Sentence> parse_conllu(std::string_view text, ErrorMode mode) {
  std::istringstream in{std::string(text)};
  ConlluReader reader(in, mode);
  std::vector<Sentence> out;
  while (auto s = reader.next()) out.push_back(std::move(*s));
  return out;
}

void write_conllu(std::ostream& out, const Sentence& sentence) {
  auto field = [](const std::string& s) -> std::string_view { return s.empty() ? "_" : s; };
  for (const Token& t : sentence.tokens) {
    out << t.index << '\t' << field(t.form) << '\t' << field(t.lemma) << '\t' << field(t.upos)
        << "\t_\t_\t" << t.head << '\t' << field(t.deprel) << "\t_\t_\n";
  }
  out << '\n';
}

std::string to_conllu(const Sentence& sentence) {
  std::ostringstream out;
  write_conllu(out, sentence);
  return out.str();
}

}  // namespace depctx
