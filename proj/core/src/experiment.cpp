#include "depctx/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "depctx/error.hpp"

namespace fs = std::filesystem;

namespace depctx {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    if (auto item = trim(text.substr(start, comma - start)); !item.empty()) out.push_back(item);
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not a valid number", key, value));
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) throw ConfigError(fmt::format("{}: '{}' must be finite", key, value));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, value));
}

fs::path resolve(std::string_view value, const fs::path& base_dir) {
  fs::path p{std::string(value)};
  if (p.is_relative()) p = base_dir / p;
  return p.lexically_normal();
}

std::optional<fs::path> optional_path(std::string_view value, const fs::path& base_dir) {
  if (value.empty()) return std::nullopt;
  return resolve(value, base_dir);
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string_view to_string(CvMode mode) { return mode == CvMode::kPerFold ? "per-fold" : "fixed-dev"; }

CvMode parse_cv_mode(std::string_view text) {
  if (text == "per-fold") return CvMode::kPerFold;
  if (text == "fixed-dev") return CvMode::kFixedDev;
  throw ConfigError(fmt::format("unknown cv mode '{}' (expected per-fold or fixed-dev)", text));
}

void ExperimentConfig::set(std::string_view key, std::string_view value, const fs::path& base_dir) {
  value = trim(value);
  key = trim(key);
  if (key == "corpus") {
    corpora.clear();
    for (auto item : split_list(value)) corpora.push_back(resolve(item, base_dir));
  } else if (key == "mapping_table") {
    mapping_table = optional_path(value, base_dir);
    table_.reset();
  } else if (key == "work_dir") {
    if (value.empty()) throw ConfigError("work_dir must not be empty");
    work_dir = resolve(value, base_dir);
  } else if (key == "cache_dir") {
    cache_dir = optional_path(value, base_dir);
  } else if (key == "dataset") {
    dataset = optional_path(value, base_dir);
  } else if (key == "toefl") {
    toefl = optional_path(value, base_dir);
  } else if (key == "window") {
    extraction.window = parse_number<int>(key, value);
  } else if (key == "conj_variant") {
    extraction.conj_variant = parse_conj_variant(value);
  } else if (key == "collapse_prepositions") {
    extraction.collapse_prepositions = parse_bool(key, value);
  } else if (key == "collapse_obl") {
    extraction.collapse_obl = parse_bool(key, value);
  } else if (key == "baselines") {
    extraction.baselines = parse_bool(key, value);
  } else if (key == "dim") {
    trainer.dim = parse_number<int>(key, value);
  } else if (key == "negatives") {
    trainer.negatives = parse_number<int>(key, value);
  } else if (key == "lr") {
    trainer.initial_lr = parse_number<double>(key, value);
  } else if (key == "subsample") {
    trainer.subsample = parse_number<double>(key, value);
  } else if (key == "epochs") {
    trainer.epochs = parse_number<int>(key, value);
  } else if (key == "min_count") {
    trainer.min_count = parse_number<std::uint64_t>(key, value);
  } else if (key == "unigram_power") {
    trainer.unigram_power = parse_number<double>(key, value);
  } else if (key == "seed") {
    trainer.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "workers") {
    trainer.workers = parse_number<unsigned>(key, value);
  } else if (key == "subsample_contexts") {
    trainer.subsample_contexts = parse_bool(key, value);
  } else if (key == "max_in_memory_pairs") {
    trainer.max_in_memory_pairs = parse_number<std::uint64_t>(key, value);
  } else if (key == "classes") {
    classes.clear();
    for (auto item : split_list(value)) classes.push_back(ClassFilter::parse(item));
    if (classes.empty()) throw ConfigError("classes must list at least one of A, V, N, ALL");
  } else if (key == "strategy") {
    strategy = parse_search_strategy(value);
  } else if (key == "threshold") {
    threshold = parse_number<double>(key, value);
  } else if (key == "fold_seed") {
    fold_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "cv_mode") {
    cv_mode = parse_cv_mode(value);
  } else if (key == "follow_best_child") {
    follow_best_child = parse_bool(key, value);
  } else if (key == "exhaustive_max_pool") {
    exhaustive_max_pool = parse_number<std::size_t>(key, value);
  } else if (key == "jobs") {
    jobs = parse_number<unsigned>(key, value);
    if (jobs == 0) throw ConfigError("jobs must be >= 1");
  } else if (key == "extract_workers") {
    extract_workers = parse_number<unsigned>(key, value);
    if (extract_workers == 0) throw ConfigError("extract_workers must be >= 1");
  } else {
    throw ConfigError(fmt::format("unknown experiment key '{}'", key));
  }
}

ExperimentConfig ExperimentConfig::parse(std::string_view text, const fs::path& base_dir) {
  ExperimentConfig config;
  config.work_dir = (base_dir / config.work_dir).lexically_normal();
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    }
    try {
      config.set(line.substr(0, eq), line.substr(eq + 1), base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  config.extraction.validate();
  config.trainer.validate();
  return config;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open experiment config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const fs::path base = fs::absolute(path).parent_path();
  try {
    return parse(ss.str(), base);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string ExperimentConfig::to_text() const {
  std::string out;
  auto put = [&](std::string_view key, const std::string& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  auto path_text = [](const std::optional<fs::path>& p) { return p ? p->string() : std::string(); };
  std::string corpus_list;
  for (const auto& c : corpora) corpus_list += (corpus_list.empty() ? "" : ",") + c.string();
  std::string class_list;
  for (const auto& c : classes) class_list += (class_list.empty() ? "" : ",") + c.name();

  put("corpus", corpus_list);
  put("mapping_table", path_text(mapping_table));
  put("work_dir", work_dir.string());
  put("cache_dir", path_text(cache_dir));
  put("dataset", path_text(dataset));
  put("toefl", path_text(toefl));
  put("window", std::to_string(extraction.window));
  put("conj_variant", std::string(to_string(extraction.conj_variant)));
  put("collapse_prepositions", bool_text(extraction.collapse_prepositions));
  put("collapse_obl", bool_text(extraction.collapse_obl));
  put("baselines", bool_text(extraction.baselines));
  put("dim", std::to_string(trainer.dim));
  put("negatives", std::to_string(trainer.negatives));
  put("lr", fmt::format("{}", trainer.initial_lr));
  put("subsample", fmt::format("{}", trainer.subsample));
  put("epochs", std::to_string(trainer.epochs));
  put("min_count", std::to_string(trainer.min_count));
  put("unigram_power", fmt::format("{}", trainer.unigram_power));
  put("seed", std::to_string(trainer.seed));
  put("workers", std::to_string(trainer.workers));
  put("subsample_contexts", bool_text(trainer.subsample_contexts));
  put("max_in_memory_pairs", std::to_string(trainer.max_in_memory_pairs));
  put("classes", class_list);
  put("strategy", std::string(to_string(strategy)));
  put("threshold", fmt::format("{}", threshold));
  put("fold_seed", std::to_string(fold_seed));
  put("cv_mode", std::string(to_string(cv_mode)));
  put("follow_best_child", bool_text(follow_best_child));
  put("exhaustive_max_pool", std::to_string(exhaustive_max_pool));
  put("jobs", std::to_string(jobs));
  put("extract_workers", std::to_string(extract_workers));
  return out;
}

fs::path ExperimentConfig::resolved_cache_dir() const {
  if (const char* env = std::getenv(kCacheDirEnv); env != nullptr && *env != '\0') return fs::path(env);
  return cache_dir ? *cache_dir : work_dir / "cache";
}

const BagMappingTable& ExperimentConfig::table() const {
  if (!mapping_table) return BagMappingTable::defaults();
  if (!table_) table_ = BagMappingTable::load(*mapping_table);
  return *table_;
}

void ExperimentConfig::validate_inputs(bool need_dataset) const {
  extraction.validate();
  trainer.validate();
  if (corpora.empty()) throw ConfigError("no corpus configured (set 'corpus')");
  for (const auto& c : corpora) {
    if (!fs::is_regular_file(c)) throw ConfigError("corpus not found: " + c.string());
  }
  if (mapping_table && !fs::is_regular_file(*mapping_table)) {
    throw ConfigError("mapping table not found: " + mapping_table->string());
  }
  if (need_dataset) {
    if (!dataset) throw ConfigError("no dataset configured (set 'dataset')");
    if (!fs::is_regular_file(*dataset)) throw ConfigError("dataset not found: " + dataset->string());
  }
  if (toefl && !fs::is_regular_file(*toefl)) throw ConfigError("TOEFL file not found: " + toefl->string());
  if (classes.empty()) throw ConfigError("classes must list at least one of A, V, N, ALL");
  if (!std::isfinite(threshold)) throw ConfigError("threshold must be finite");
}

}  // namespace depctx
