#include "depctx/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "depctx/conllu.hpp"
#include "depctx/hash.hpp"
#include "depctx/text_input.hpp"

namespace fs = std::filesystem;

namespace depctx {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kExtractBatch = 4096;

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw Error("failed to write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string extraction_input_hash(const ExperimentConfig& config) {
  ContentHasher h;
  h.add_field("extraction", extraction_config_hash(config.extraction, config.table()));
  h.add_field("corpora", corpus_fingerprint(config.corpora));
  return h.hex();
}

// Puts the fitness cache in front of another scorer. A configuration is a
// hit only when every requested split is cached.
class CachingScorer : public ConfigurationScorer {
 public:
  CachingScorer(ConfigurationScorer& inner, FitnessCache& cache, std::string experiment)
      : inner_(inner), cache_(cache), experiment_(std::move(experiment)) {}

  ScoredConfiguration score(const Configuration& configuration, std::span<const Split> splits) override {
    const std::string& key = configuration.canonical();
    ScoredConfiguration cached;
    bool complete = true;
    for (const auto& split : splits) {
      auto r = cache_.lookup(experiment_, key, split.name);
      if (!r) {
        complete = false;
        break;
      }
      cached.by_split[split.name] = {r->rho, r->n_scored, r->n_total};
      cached.wall_seconds = r->wall_seconds;
      cached.pairs = r->pairs;
    }
    if (complete) {
      ++hits_;
      return cached;
    }
    ScoredConfiguration fresh = inner_.score(configuration, splits);
    ++misses_;
    for (const auto& split : splits) {
      const auto& s = fresh.by_split.at(split.name);
      cache_.insert({experiment_, key, split.name, s.rho, fresh.wall_seconds, fresh.pairs, s.n_scored,
                     s.n_total});
    }
    // Report what the cache holds so first and repeated runs agree.
    for (const auto& split : splits) {
      auto r = cache_.lookup(experiment_, key, split.name);
      fresh.by_split[split.name] = {r->rho, r->n_scored, r->n_total};
    }
    return fresh;
  }

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  ConfigurationScorer& inner_;
  FitnessCache& cache_;
  std::string experiment_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

// Scores `configs` with up to `jobs` concurrent calls.
void prefetch(ConfigurationScorer& scorer, const std::vector<Configuration>& configs,
              std::span<const Split> splits, unsigned jobs) {
  if (jobs <= 1 || configs.size() < 2) {
    for (const auto& c : configs) scorer.score(c, splits);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> threads;
    for (unsigned j = 0; j < std::min<std::size_t>(jobs, configs.size()); ++j) {
      threads.emplace_back([&] {
        while (!failed.load()) {
          const std::size_t i = next.fetch_add(1);
          if (i >= configs.size()) return;
          try {
            scorer.score(configs[i], splits);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed.store(true);
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

std::string rho_text(double rho) { return format_rho(rho); }

double mean_of(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) return kNegInf;
  return (a + b) / 2.0;
}

TraceStatus parse_status(std::string_view text) {
  for (auto s : {TraceStatus::kPoolMember, TraceStatus::kExcluded, TraceStatus::kRoot, TraceStatus::kKept,
                 TraceStatus::kPruned, TraceStatus::kFollowed, TraceStatus::kEnumerated}) {
    if (to_string(s) == text) return s;
  }
  throw FormatError(fmt::format("unknown trace status '{}'", text));
}

double parse_fitness(std::string_view text) {
  if (text == "-inf") return kNegInf;
  if (text == "inf") return std::numeric_limits<double>::infinity();
  double v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw FormatError(fmt::format("'{}' is not a number", text));
  }
  return v;
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

}  // namespace

std::string dataset_hash(const WordPairDataset& dataset) {
  ContentHasher h;
  for (const auto& e : dataset.entries) {
    h.add_field(e.word1, e.word2);
    h.add_field(fmt::format("{:.17g}", e.gold), std::string(1, to_char(e.word_class)));
  }
  return h.hex();
}

std::string format_rho(double rho) {
  if (!std::isfinite(rho)) return "NA";
  std::string s = fmt::format("{:.6f}", rho);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string corpus_fingerprint(const std::vector<fs::path>& corpora) {
  ContentHasher h;
  for (const auto& c : corpora) {
    std::error_code ec;
    const auto size = fs::file_size(c, ec);
    if (ec) throw ConfigError("corpus not found: " + c.string());
    const auto mtime = fs::last_write_time(c, ec).time_since_epoch().count();
    h.add_field("path", fs::absolute(c).lexically_normal().string());
    h.add_field("size", std::to_string(size));
    h.add_field("mtime", std::to_string(mtime));
  }
  return h.hex();
}

ExtractOutcome cmd_extract(const ExperimentConfig& config) {
  config.validate_inputs(false);
  const std::string input_hash = extraction_input_hash(config);
  const fs::path dir = config.bag_dir();
  if (bag_directory_complete(dir)) {
    BagManifest existing = BagManifest::load(dir / kManifestFile);
    if (existing.input_hash == input_hash) {
      spdlog::info("extract: cache hit, reusing {} ({} sentences)", dir.string(), existing.sentences);
      return {std::move(existing), true};
    }
  }
  const auto start = std::chrono::steady_clock::now();
  BagWriter writer(dir, config.table(), config.extraction);
  std::vector<Sentence> batch;
  batch.reserve(kExtractBatch);
  for (const auto& corpus : config.corpora) {
    auto in = open_text_input(corpus);
    ConlluReader reader(*in, ErrorMode::kSkipSentence);
    while (auto s = reader.next()) {
      batch.push_back(std::move(*s));
      if (batch.size() == kExtractBatch) {
        writer.add_batch(batch, config.extract_workers);
        batch.clear();
      }
    }
    writer.add_batch(batch, config.extract_workers);
    batch.clear();
    if (in->bad()) throw Error("read error in " + corpus.string());
    writer.note_skipped(reader.skipped_sentences());
    if (reader.skipped_sentences() > 0) {
      spdlog::warn("{}: skipped {} malformed sentences", corpus.string(), reader.skipped_sentences());
    }
  }
  writer.set_input_hash(input_hash);
  BagManifest manifest = writer.finish();
  write_text(config.work_dir / "resolved.conf", config.to_text());
  spdlog::info("extract: {} sentences into {} bags in {:.2f}s", manifest.sentences, manifest.counts.size(),
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return {std::move(manifest), false};
}

TrainResult cmd_train(const ExperimentConfig& config, const Configuration& configuration) {
  const ExtractOutcome extracted = cmd_extract(config);
  BagPairStream stream = compose_configuration(configuration, extracted.manifest, config.bag_dir());
  spdlog::info("train: {} with {} pairs", configuration.canonical(), stream.expected_pairs());
  return train(stream, config.trainer);
}

TrainingScorer::TrainingScorer(const ExperimentConfig& config, BagManifest manifest, WordPairDataset dataset)
    : config_(config), manifest_(std::move(manifest)), dataset_(std::move(dataset)) {}

ScoredConfiguration TrainingScorer::score(const Configuration& configuration, std::span<const Split> splits) {
  ScoredConfiguration out;
  out.pairs = manifest_.total(configuration);
  BagPairStream stream = compose_configuration(configuration, manifest_, config_.bag_dir());
  std::optional<TrainResult> trained;
  try {
    trained = train(stream, config_.trainer);
  } catch (const ConfigError& e) {
    spdlog::warn("{}: cannot train ({}); fitness is undefined", configuration.canonical(), e.what());
  }
  for (const auto& split : splits) {
    SplitScore s;
    s.n_total = split.indices.size();
    s.rho = kNegInf;
    if (trained) {
      out.wall_seconds = trained->stats.wall_seconds;
      const VectorTable& words = trained->embeddings.words;
      for (auto i : split.indices) {
        const auto& e = dataset_.entries[i];
        if (split.filter.accepts(e.word_class) && words.contains(e.word1) && words.contains(e.word2)) {
          ++s.n_scored;
        }
      }
      try {
        s.rho = evaluate(words, dataset_, split.filter, split.indices).rho;
      } catch (const UndefinedCorrelation& e) {
        spdlog::debug("{} on {}: {}", configuration.canonical(), split.name, e.what());
      }
    }
    out.by_split[split.name] = s;
  }
  spdlog::info("scored {} ({} pairs)", configuration.canonical(), out.pairs);
  return out;
}

std::string experiment_hash(const ExperimentConfig& config, const BagManifest& manifest,
                            const std::string& dataset_digest) {
  ContentHasher h;
  h.add_field("extraction_input", manifest.input_hash);
  h.add_field("trainer", config.trainer.hash());
  h.add_field("dataset", dataset_digest);
  h.add_field("fold_seed", std::to_string(config.fold_seed));
  return h.hex();
}

std::vector<ReportRow> report_rows(const FitnessCache& cache, const std::string& experiment,
                                   const std::string& class_name, const BagManifest& manifest,
                                   const SearchTrace* trace) {
  const std::string fold_a = class_name + "/a";
  const std::string fold_b = class_name + "/b";
  std::map<std::string, std::pair<std::optional<FitnessRecord>, std::optional<FitnessRecord>>> by_config;
  for (const auto& r : cache.records_for(experiment)) {
    if (r.fold == fold_a) by_config[r.configuration].first = r;
    if (r.fold == fold_b) by_config[r.configuration].second = r;
  }
  std::vector<ReportRow> rows;
  for (const auto& [name, recs] : by_config) {
    if (!recs.first || !recs.second) continue;
    const Configuration c = Configuration::parse(name);
    if (trace && !trace->find(c)) continue;
    ReportRow row;
    row.configuration = name;
    row.rho_a = recs.first->rho;
    row.rho_b = recs.second->rho;
    row.mean_rho = mean_of(row.rho_a, row.rho_b);
    row.pairs = manifest.total(c);
    row.wall_seconds = recs.first->wall_seconds;
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.mean_rho != b.mean_rho) return a.mean_rho > b.mean_rho;
    return a.configuration < b.configuration;
  });
  return rows;
}

std::string cmd_report(const FitnessCache& cache, const std::string& experiment, const std::string& class_name,
                       const BagManifest& manifest, const SearchTrace* trace, bool include_timing) {
  std::string out = "configuration\trho_a\trho_b\tmean_rho\tpairs";
  out += include_timing ? "\twall_seconds\n" : "\n";
  for (const auto& row : report_rows(cache, experiment, class_name, manifest, trace)) {
    out += fmt::format("{}\t{}\t{}\t{}\t{}", row.configuration, rho_text(row.rho_a), rho_text(row.rho_b),
                       rho_text(row.mean_rho), row.pairs);
    out += include_timing ? fmt::format("\t{:.3f}\n", row.wall_seconds) : "\n";
  }
  return out;
}

SearchTrace load_trace(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open trace " + path.string());
  SearchTrace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 || line.empty()) continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 5) {
      throw FormatError(fmt::format("{}:{}: expected 5 columns, found {}", path.string(), line_no, cols.size()));
    }
    try {
      TraceEntry e{Configuration::parse(cols[0]), 0, parse_fitness(cols[2]), parse_status(cols[3]),
                   std::nullopt};
      e.level = e.configuration.size();
      if (cols[4] != "-") e.origin = Configuration::parse(cols[4]);
      trace.add(std::move(e));
    } catch (const std::exception& e) {
      throw FormatError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  return trace;
}

SearchOutcome cmd_search(const ExperimentConfig& config, ConfigurationScorer* scorer) {
  config.validate_inputs(true);
  const ExtractOutcome extracted = cmd_extract(config);
  const BagManifest& manifest = extracted.manifest;
  const WordPairDataset dataset = WordPairDataset::load(*config.dataset);
  if (dataset.entries.empty()) throw ConfigError("dataset " + config.dataset->string() + " has no pairs");

  SearchOutcome outcome;
  outcome.experiment = experiment_hash(config, manifest, dataset_hash(dataset));
  FitnessCache cache(config.resolved_cache_dir() / "fitness.tsv");
  std::optional<TrainingScorer> default_scorer;
  if (!scorer) scorer = &default_scorer.emplace(config, manifest, dataset);
  CachingScorer cached(*scorer, cache, outcome.experiment);

  const fs::path out_dir = config.work_dir / "search";
  fs::create_directories(out_dir);
  write_text(out_dir / "resolved.conf", config.to_text());
  spdlog::info("search: experiment {}, strategy {}, cv {}, fold seed {}", outcome.experiment,
               to_string(config.strategy), to_string(config.cv_mode), config.fold_seed);

  const std::vector<std::string> bags = config.table().image();
  std::string report = "class\tkind\tname\tconfiguration\trho_a\trho_b\tmean_rho\tpairs\n";

  for (const ClassFilter& filter : config.classes) {
    const std::string cls = filter.name();
    const FoldSplit folds = split_folds(dataset, filter, config.fold_seed);
    const std::vector<Split> splits = {{cls + "/a", filter, folds.fold_a}, {cls + "/b", filter, folds.fold_b}};
    spdlog::info("class {}: folds of {}/{} pairs", cls, folds.fold_a.size(), folds.fold_b.size());

    auto score = [&](const Configuration& c) { return cached.score(c, splits); };
    auto add_row = [&](std::string_view kind, std::string_view name, const std::string& configuration,
                       const ScoredConfiguration& s, std::uint64_t pairs) {
      const double a = s.by_split.at(splits[0].name).rho;
      const double b = s.by_split.at(splits[1].name).rho;
      report += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", cls, kind, name, configuration, rho_text(a),
                            rho_text(b), rho_text(mean_of(a, b)), pairs);
    };

    std::vector<Configuration> singles;
    for (const auto& bag : bags) singles.emplace_back(std::vector<std::string>{bag});
    prefetch(cached, singles, splits, config.jobs);

    // Baselines, scored on both folds.
    std::vector<std::pair<std::string, Configuration>> baselines;
    baselines.emplace_back("DEPS-All", Configuration(bags));
    if (std::find(bags.begin(), bags.end(), "conjlr") != bags.end()) {
      baselines.emplace_back("COORD", Configuration({"conjlr"}));
    }
    if (config.extraction.baselines) {
      baselines.emplace_back("BOW", Configuration({std::string(kBowBag)}));
      baselines.emplace_back("POSIT", Configuration({std::string(kPositBag)}));
    }
    for (const auto& [name, c] : baselines) add_row("baseline", name, c.canonical(), score(c), manifest.total(c));

    std::vector<const SearchTrace*> class_traces;
    std::vector<std::string> dev_folds = {"a", "b"};
    if (config.cv_mode == CvMode::kFixedDev) dev_folds = {"a"};
    const std::size_t first_fold = outcome.folds.size();
    for (const auto& dev : dev_folds) {
      const std::string dev_split = cls + "/" + dev;
      const std::string test_split = cls + "/" + (dev == "a" ? "b" : "a");
      FitnessFn fitness = [&](const Configuration& c) { return score(c).by_split.at(dev_split).rho; };

      FoldOutcome fold;
      fold.class_name = cls;
      fold.dev_fold = dev;
      for (const auto& c : singles) fold.bag_fitness[c.canonical()] = fitness(c);
      try {
        ConfigurationSpace space = build_pool(fold.bag_fitness, config.threshold);
        fold.pool = space.pool;
        SearchResult result = [&] {
          switch (config.strategy) {
            case SearchStrategy::kGreedy:
              return greedy_search(space, fitness);
            case SearchStrategy::kExhaustive:
              return exhaustive_search(space, fitness, config.exhaustive_max_pool);
            case SearchStrategy::kAlg1:
              break;
          }
          return best_configuration_search(space, fitness, {config.follow_best_child});
        }();
        fold.best = result.best;
        fold.dev_rho = result.best_fitness;
        fold.test_rho = score(result.best).by_split.at(test_split).rho;
        fold.pairs = manifest.total(result.best);
        fold.trace = std::move(result.trace);
        spdlog::info("class {} dev {}: pool {} -> best {} (dev {}, test {}), {} visited", cls, dev,
                     Configuration(space.pool).canonical(), fold.best->canonical(), rho_text(fold.dev_rho),
                     rho_text(fold.test_rho), fold.trace.size());
      } catch (const PoolInfeasible& e) {
        fold.feasible = false;
        spdlog::warn("class {} dev {}: {}", cls, dev, e.what());
        for (const auto& c : singles) {
          fold.trace.add({c, 1, fold.bag_fitness.at(c.canonical()), TraceStatus::kExcluded, std::nullopt});
        }
      }
      write_text(out_dir / fmt::format("{}-dev-{}.trace.tsv", cls, dev), fold.trace.to_tsv());
      outcome.folds.push_back(std::move(fold));
    }

    double test_sum = 0.0;
    bool all_feasible = true;
    for (std::size_t i = first_fold; i < outcome.folds.size(); ++i) {
      const FoldOutcome& f = outcome.folds[i];
      const std::string name = "dev=" + f.dev_fold;
      if (!f.feasible) {
        all_feasible = false;
        report += fmt::format("{}\tinfeasible\t{}\t-\tNA\tNA\tNA\t0\n", cls, name);
        continue;
      }
      add_row("best", name, f.best->canonical(), score(*f.best), f.pairs);
      test_sum += f.test_rho;
    }
    const std::size_t n_folds = outcome.folds.size() - first_fold;
    const double cv = all_feasible ? test_sum / static_cast<double>(n_folds) : kNegInf;
    report += fmt::format("{}\tcv\ttest-mean\t-\tNA\tNA\t{}\t0\n", cls, rho_text(cv));

    // Every configuration visited by this class's searches.
    SearchTrace visited;
    for (std::size_t i = first_fold; i < outcome.folds.size(); ++i) {
      for (const auto& e : outcome.folds[i].trace.entries()) {
        if (!visited.find(e.configuration)) visited.add(e);
      }
    }
    for (const auto& row : report_rows(cache, outcome.experiment, cls, manifest, &visited)) {
      report += fmt::format("{}\tconfig\t-\t{}\t{}\t{}\t{}\t{}\n", cls, row.configuration, rho_text(row.rho_a),
                            rho_text(row.rho_b), rho_text(row.mean_rho), row.pairs);
    }
  }

  write_text(out_dir / "report.tsv", report);
  outcome.report = std::move(report);
  outcome.cache_hits = cached.hits();
  outcome.cache_misses = cached.misses();
  spdlog::info("search: {} configurations trained, {} cache hits; report in {}", outcome.cache_misses,
               outcome.cache_hits, (out_dir / "report.tsv").string());
  return outcome;
}

}  // namespace depctx
