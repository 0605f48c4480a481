// depctx: extract dependency context bags, train SGNS embeddings on
// context configurations and search for the best configuration.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "depctx/conllu.hpp"
#include "depctx/embeddings.hpp"
#include "depctx/error.hpp"
#include "depctx/evaluation.hpp"
#include "depctx/experiment.hpp"
#include "depctx/pipeline.hpp"

namespace fs = std::filesystem;
using namespace depctx;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct ExperimentArgs {
  std::string config_path;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "Experiment file (key = value lines)");
    cmd->add_option("-s,--set", overrides, "Override one setting, e.g. --set dim=50")->take_all();
  }

  ExperimentConfig load() const {
    ExperimentConfig config = config_path.empty() ? ExperimentConfig::parse("", fs::current_path())
                                                  : ExperimentConfig::load(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError(fmt::format("--set expects key=value, got '{}'", kv));
      config.set(kv.substr(0, eq), kv.substr(eq + 1), fs::current_path());
    }
    config.extraction.validate();
    config.trainer.validate();
    return config;
  }
};

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_extract(const ExperimentArgs& args) {
  const auto config = args.load();
  const auto outcome = cmd_extract(config);
  std::cout << fmt::format("{}\t{} sentences\t{} skipped\t{}\n", config.bag_dir().string(),
                           outcome.manifest.sentences, outcome.manifest.skipped_sentences,
                           outcome.cache_hit ? "cached" : "extracted");
  for (const auto& [bag, n] : outcome.manifest.counts) std::cout << bag << '\t' << n << '\n';
  return 0;
}

int run_train(const ExperimentArgs& args, const std::string& configuration, const std::string& output,
              bool with_contexts) {
  const auto config = args.load();
  const auto result = cmd_train(config, Configuration::parse(configuration));
  save_embeddings(result.embeddings, output, with_contexts);
  std::cout << fmt::format("{}\t{} words\t{} contexts\t{} pairs\t{:.2f}s\n", output,
                           result.embeddings.words.size(), result.embeddings.contexts.size(),
                           result.stats.retained_pairs, result.stats.wall_seconds);
  for (std::size_t e = 0; e < result.stats.epoch_loss.size(); ++e) {
    spdlog::info("epoch {} mean loss {:.6f}", e + 1, result.stats.epoch_loss[e]);
  }
  return 0;
}

int run_eval(const std::string& vectors, const std::string& dataset_path, const std::vector<std::string>& classes) {
  const VectorTable table = load_vectors(vectors);
  const WordPairDataset dataset = WordPairDataset::load(dataset_path);
  std::cout << "class\trho\tn_scored\tn_total\n";
  for (const auto& c : classes) {
    const ClassFilter filter = ClassFilter::parse(c);
    try {
      const EvalResult r = evaluate(table, dataset, filter);
      std::cout << fmt::format("{}\t{}\t{}\t{}\n", filter.name(), format_rho(r.rho), r.n_scored, r.n_total);
    } catch (const UndefinedCorrelation& e) {
      std::cout << fmt::format("{}\tNA\t-\t{}\n", filter.name(), dataset.indices(filter).size());
      spdlog::warn("{}: {}", filter.name(), e.what());
    }
  }
  return 0;
}

int run_search(const ExperimentArgs& args) {
  const auto config = args.load();
  const auto outcome = cmd_search(config);
  std::cout << outcome.report;
  return 0;
}

int run_report(const ExperimentArgs& args, const std::vector<std::string>& classes, const std::string& trace_path,
               bool timing) {
  const auto config = args.load();
  config.validate_inputs(true);
  const auto extracted = cmd_extract(config);
  const auto dataset = WordPairDataset::load(*config.dataset);
  const std::string experiment = experiment_hash(config, extracted.manifest, dataset_hash(dataset));
  const fs::path cache_path = config.resolved_cache_dir() / "fitness.tsv";
  if (!fs::exists(cache_path)) throw ConfigError("no fitness cache at " + cache_path.string());
  const FitnessCache cache(cache_path);
  std::optional<SearchTrace> trace;
  if (!trace_path.empty()) trace = load_trace(trace_path);
  std::vector<std::string> names = classes;
  if (names.empty()) {
    for (const auto& c : config.classes) names.push_back(c.name());
  }
  bool first = true;
  for (const auto& name : names) {
    const std::string cls = ClassFilter::parse(name).name();
    if (!first) std::cout << '\n';
    first = false;
    std::cout << "# class " << cls << '\n'
              << cmd_report(cache, experiment, cls, extracted.manifest, trace ? &*trace : nullptr, timing);
  }
  return 0;
}

int run_toefl(const std::string& vectors, const std::string& questions) {
  const VectorTable table = load_vectors(vectors);
  const auto qs = load_toefl(questions);
  const ToeflResult r = toefl_evaluate(table, qs);
  std::cout << "class\tcorrect\ttotal\n";
  for (const auto& [cls, s] : r.by_class) std::cout << fmt::format("{}\t{}\t{}\n", cls, s.correct, s.total);
  std::cout << fmt::format("ALL\t{}\t{}\n", r.overall.correct, r.overall.total);
  return 0;
}

int run_convert_simlex(const std::string& input, const std::string& output) {
  const WordPairDataset ds = convert_simlex(read_all(input));
  ds.save(output);
  std::cout << fmt::format("{}\t{} pairs\n", output, ds.entries.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dependency-context configuration search for word embeddings"};
  app.require_subcommand(1);
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  ExperimentArgs extract_args, train_args, search_args, report_args;

  auto* extract = app.add_subcommand("extract", "Write per-bag pair files and a manifest");
  extract_args.attach(extract);

  auto* train = app.add_subcommand("train", "Train embeddings for one configuration");
  train_args.attach(train);
  std::string configuration, output = "vectors.txt";
  bool with_contexts = false;
  train->add_option("-C,--configuration", configuration, "Bags joined by '+', e.g. amod+conj")->required();
  train->add_option("-o,--output", output, "Word vector file (word2vec text format)");
  train->add_flag("--contexts", with_contexts, "Also write context vectors next to the output");

  auto* eval = app.add_subcommand("eval", "Spearman rho of a vector file against a similarity dataset");
  std::string eval_vectors, eval_dataset;
  std::vector<std::string> eval_classes{"A", "V", "N", "ALL"};
  eval->add_option("--vectors", eval_vectors)->required()->check(CLI::ExistingFile);
  eval->add_option("--dataset", eval_dataset)->required()->check(CLI::ExistingFile);
  eval->add_option("--class", eval_classes, "A, V, N or ALL (repeatable)");

  auto* search = app.add_subcommand("search", "Pool construction, configuration search and report");
  search_args.attach(search);

  auto* report = app.add_subcommand("report", "Tables of cached fitness per class");
  report_args.attach(report);
  std::vector<std::string> report_classes;
  std::string trace_path;
  bool timing = false;
  report->add_option("--class", report_classes, "A, V, N or ALL (repeatable)");
  report->add_option("--trace", trace_path, "Only configurations in this search trace")->check(CLI::ExistingFile);
  report->add_flag("--timing", timing, "Add the training wall-time column");

  auto* toefl = app.add_subcommand("toefl", "Multiple-choice synonym accuracy");
  std::string toefl_vectors, toefl_questions;
  toefl->add_option("--vectors", toefl_vectors)->required()->check(CLI::ExistingFile);
  toefl->add_option("--questions", toefl_questions)->required()->check(CLI::ExistingFile);

  auto* simlex = app.add_subcommand("convert-simlex", "Convert a SimLex-999 file into the dataset format");
  std::string simlex_in, simlex_out;
  simlex->add_option("input", simlex_in)->required()->check(CLI::ExistingFile);
  simlex->add_option("output", simlex_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("depctx"));
  spdlog::set_pattern("[%H:%M:%S] %^%l%$ %v");
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (*extract) return run_extract(extract_args);
    if (*train) return run_train(train_args, configuration, output, with_contexts);
    if (*eval) return run_eval(eval_vectors, eval_dataset, eval_classes);
    if (*search) return run_search(search_args);
    if (*report) return run_report(report_args, report_classes, trace_path, timing);
    if (*toefl) return run_toefl(toefl_vectors, toefl_questions);
    if (*simlex) return run_convert_simlex(simlex_in, simlex_out);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
