#include "depctx/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "depctx/conllu.hpp"
#include "depctx/error.hpp"
#include "depctx/random.hpp"

namespace depctx {
namespace {

template <class T>
Cosine cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument(fmt::format("cosine: dimension mismatch ({} vs {})", u.size(), v.size()));
  }
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * v[i];
    nu += static_cast<double>(u[i]) * u[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (nu == 0 || nv == 0) return {0.0, true};
  return {dot / (std::sqrt(nu) * std::sqrt(nv)), false};
}

std::vector<std::string_view> split_ws(std::string_view line, std::string_view seps) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const auto b = line.find_first_not_of(seps, i);
    if (b == std::string_view::npos) break;
    auto e = line.find_first_of(seps, b);
    if (e == std::string_view::npos) e = line.size();
    out.push_back(line.substr(b, e - b));
    i = e;
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class Fn>
void for_each_line(std::string_view text, Fn fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    pos = nl + 1;
  }
}

bool blank(std::string_view line) { return line.find_first_not_of(" \t") == std::string_view::npos; }

}  // namespace

Cosine cosine(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }
Cosine cosine(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument(fmt::format("length mismatch ({} vs {})", xs.size(), ys.size()));
  }
  const std::size_t n = xs.size();
  if (n < 2) throw UndefinedCorrelation(fmt::format("correlation needs at least 2 points, got {}", n));
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw UndefinedCorrelation("correlation undefined for a constant sequence");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument(fmt::format("length mismatch ({} vs {})", xs.size(), ys.size()));
  }
  if (xs.size() < 2) {
    throw UndefinedCorrelation(fmt::format("correlation needs at least 2 points, got {}", xs.size()));
  }
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

char to_char(WordClass c) {
  switch (c) {
    case WordClass::kAdjective:
      return 'A';
    case WordClass::kVerb:
      return 'V';
    case WordClass::kNoun:
      return 'N';
  }
  return 'N';
}

WordClass parse_word_class(std::string_view text) {
  if (text == "A" || text == "a") return WordClass::kAdjective;
  if (text == "V" || text == "v") return WordClass::kVerb;
  if (text == "N" || text == "n") return WordClass::kNoun;
  throw FormatError(fmt::format("unknown word class '{}' (expected A, V or N)", text));
}

ClassFilter ClassFilter::parse(std::string_view text) {
  if (text == "ALL" || text == "all") return all();
  try {
    return of(parse_word_class(text));
  } catch (const FormatError&) {
    throw ConfigError(fmt::format("unknown class selection '{}' (expected A, V, N or ALL)", text));
  }
}

std::string ClassFilter::name() const { return only ? std::string(1, to_char(*only)) : "ALL"; }

WordPairDataset WordPairDataset::parse(std::string_view text) {
  WordPairDataset ds;
  bool header = true;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (header) {
      header = false;
      return;
    }
    if (blank(line)) return;
    const auto cols = split_tabs(line);
    if (cols.size() != 4) {
      throw FormatError(fmt::format("line {}: expected 4 tab-separated columns, found {}", line_no, cols.size()));
    }
    WordPair p;
    p.word1 = lowercase_utf8(cols[0]);
    p.word2 = lowercase_utf8(cols[1]);
    if (p.word1.empty() || p.word2.empty()) throw FormatError(fmt::format("line {}: empty word", line_no));
    if (!parse_double(cols[2], p.gold)) {
      throw FormatError(fmt::format("line {}: score '{}' is not a number", line_no, cols[2]));
    }
    try {
      p.word_class = parse_word_class(cols[3]);
    } catch (const FormatError& e) {
      throw FormatError(fmt::format("line {}: {}", line_no, e.what()));
    }
    ds.entries.push_back(std::move(p));
  });
  return ds;
}

WordPairDataset WordPairDataset::load(const std::filesystem::path& path) {
  try {
    return parse(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void WordPairDataset::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "word1\tword2\tscore\tclass\n";
  for (const auto& e : entries) {
    out << e.word1 << '\t' << e.word2 << '\t' << fmt::format("{}", e.gold) << '\t' << to_char(e.word_class)
        << '\n';
  }
  if (!out.flush()) throw Error("failed writing " + path.string());
}

std::vector<std::size_t> WordPairDataset::indices(ClassFilter filter) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (filter.accepts(entries[i].word_class)) out.push_back(i);
  }
  return out;
}

WordPairDataset convert_simlex(std::string_view simlex_text) {
  WordPairDataset ds;
  bool header = true;
  for_each_line(simlex_text, [&](std::size_t line_no, std::string_view line) {
    if (header) {
      header = false;
      return;
    }
    if (blank(line)) return;
    const auto cols = split_ws(line, "\t ");
    if (cols.size() < 4) {
      throw FormatError(fmt::format("line {}: expected at least 4 columns, found {}", line_no, cols.size()));
    }
    WordPair p;
    p.word1 = lowercase_utf8(cols[0]);
    p.word2 = lowercase_utf8(cols[1]);
    try {
      p.word_class = parse_word_class(cols[2]);
    } catch (const FormatError& e) {
      throw FormatError(fmt::format("line {}: {}", line_no, e.what()));
    }
    if (!parse_double(cols[3], p.gold)) {
      throw FormatError(fmt::format("line {}: score '{}' is not a number", line_no, cols[3]));
    }
    ds.entries.push_back(std::move(p));
  });
  return ds;
}

EvalResult evaluate(const VectorTable& vectors, const WordPairDataset& dataset, ClassFilter filter,
                    std::span<const std::size_t> subset) {
  std::vector<std::size_t> selected;
  if (subset.empty()) {
    selected = dataset.indices(filter);
  } else {
    for (auto i : subset) {
      if (i >= dataset.entries.size()) {
        throw std::out_of_range(fmt::format("dataset index {} out of range", i));
      }
      if (filter.accepts(dataset.entries[i].word_class)) selected.push_back(i);
    }
  }
  EvalResult r;
  r.n_total = selected.size();
  std::vector<double> gold, predicted;
  for (auto i : selected) {
    const auto& e = dataset.entries[i];
    auto u = vectors.find(e.word1);
    auto v = vectors.find(e.word2);
    if (!u || !v) continue;
    gold.push_back(e.gold);
    predicted.push_back(cosine(*u, *v).value);
  }
  r.n_scored = gold.size();
  if (r.n_scored < 2) {
    throw UndefinedCorrelation(
        fmt::format("only {} of {} pairs have both words in the vocabulary", r.n_scored, r.n_total));
  }
  r.rho = spearman(gold, predicted);
  return r;
}

FoldSplit split_folds(const WordPairDataset& dataset, ClassFilter filter, std::uint64_t seed) {
  auto idx = dataset.indices(filter);
  if (idx.size() < 2) {
    throw ConfigError(fmt::format("class {} has {} pairs; 2-fold split needs at least 2",
                                  filter.name(), idx.size()));
  }
  Rng rng(seed);
  for (std::size_t i = idx.size() - 1; i > 0; --i) {
    std::swap(idx[i], idx[rng.below(i + 1)]);
  }
  const std::size_t half = (idx.size() + 1) / 2;
  FoldSplit split;
  split.fold_a.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(half));
  split.fold_b.assign(idx.begin() + static_cast<std::ptrdiff_t>(half), idx.end());
  std::sort(split.fold_a.begin(), split.fold_a.end());
  std::sort(split.fold_b.begin(), split.fold_b.end());
  return split;
}

std::vector<ToeflQuestion> parse_toefl(std::string_view text) {
  std::vector<ToeflQuestion> out;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (blank(line)) return;
    const auto first = line.find_first_not_of(" \t");
    if (line[first] == '#') return;
    const auto cols = split_ws(line, " \t");
    if (cols.size() != 6 && cols.size() != 7) {
      throw FormatError(fmt::format("line {}: expected 6 or 7 fields, found {}", line_no, cols.size()));
    }
    ToeflQuestion q;
    q.prompt = lowercase_utf8(cols[0]);
    for (int i = 0; i < 4; ++i) q.candidates[static_cast<std::size_t>(i)] = lowercase_utf8(cols[1 + i]);
    const auto* end = cols[5].data() + cols[5].size();
    auto [ptr, ec] = std::from_chars(cols[5].data(), end, q.gold);
    if (ec != std::errc() || ptr != end || q.gold < 0 || q.gold > 3) {
      throw FormatError(fmt::format("line {}: gold index '{}' must be 0..3", line_no, cols[5]));
    }
    if (cols.size() == 7) {
      try {
        q.word_class = parse_word_class(cols[6]);
      } catch (const FormatError& e) {
        throw FormatError(fmt::format("line {}: {}", line_no, e.what()));
      }
    }
    out.push_back(std::move(q));
  });
  return out;
}

std::vector<ToeflQuestion> load_toefl(const std::filesystem::path& path) {
  try {
    return parse_toefl(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

ToeflResult toefl_evaluate(const VectorTable& vectors, std::span<const ToeflQuestion> questions) {
  ToeflResult result;
  for (const auto& q : questions) {
    const std::string cls = q.word_class ? std::string(1, to_char(*q.word_class)) : "?";
    auto& bucket = result.by_class[cls];
    ++bucket.total;
    ++result.overall.total;
    auto prompt = vectors.find(q.prompt);
    if (!prompt) continue;
    int answer = -1;
    double best = 0.0;
    for (int i = 0; i < 4; ++i) {
      auto cand = vectors.find(q.candidates[static_cast<std::size_t>(i)]);
      if (!cand) continue;
      const double sim = cosine(*prompt, *cand).value;
      if (answer < 0 || sim > best) {
        answer = i;
        best = sim;
      }
    }
    if (answer == q.gold) {
      ++bucket.correct;
      ++result.overall.correct;
    }
  }
  return result;
}

}  // namespace depctx
