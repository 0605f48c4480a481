#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "depctx/evaluation.hpp"
#include "depctx/extraction.hpp"
#include "depctx/sgns.hpp"

using namespace depctx;

namespace {

Sentence random_sentence(std::mt19937& rng, int n) {
  static const std::vector<std::string> rels = {"nsubj", "dobj", "amod", "nmod", "case", "conj", "advmod", "det"};
  Sentence s;
  for (int i = 1; i <= n; ++i) {
    Token t;
    t.index = i;
    t.form = "w" + std::to_string(rng() % 1000);
    t.head = i == 1 ? 0 : static_cast<int>(1 + rng() % static_cast<unsigned>(i - 1));
    t.deprel = i == 1 ? "root" : rels[rng() % rels.size()];
    s.tokens.push_back(std::move(t));
  }
  return s;
}

void BM_ExtractSentence(benchmark::State& state) {
  std::mt19937 rng(1);
  std::vector<Sentence> sentences;
  for (int i = 0; i < 256; ++i) sentences.push_back(random_sentence(rng, static_cast<int>(state.range(0))));
  const ExtractionConfig config;
  std::size_t i = 0, pairs = 0;
  for (auto _ : state) {
    const auto out = extract_sentence(sentences[i++ % sentences.size()], BagMappingTable::defaults(), config);
    pairs += out.size();
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["pairs/s"] = benchmark::Counter(static_cast<double>(pairs), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ExtractSentence)->Arg(10)->Arg(25)->Arg(60);

void BM_SgdPairStep(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const int negatives = 15;
  std::mt19937 rng(2);
  std::uniform_real_distribution<float> u(-0.1F, 0.1F);
  std::vector<float> word(static_cast<std::size_t>(dim)), rows(static_cast<std::size_t>(dim * (negatives + 1)));
  std::vector<float> scratch(static_cast<std::size_t>(dim));
  for (float& x : word) x = u(rng);
  for (float& x : rows) x = u(rng);
  std::vector<float*> targets;
  for (int k = 0; k <= negatives; ++k) targets.push_back(rows.data() + k * dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sgd_pair_step<float>(word.data(), targets, dim, 1e-4F, scratch.data()));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SgdPairStep)->Arg(100)->Arg(300);

void BM_TrainSmall(benchmark::State& state) {
  std::mt19937_64 rng(3);
  MemoryPairSource src;
  for (int i = 0; i < 20000; ++i) src.add("w" + std::to_string(rng() % 500), "c" + std::to_string(rng() % 2000));
  TrainerConfig config;
  config.dim = 50;
  config.negatives = 5;
  config.epochs = 1;
  config.min_count = 1;
  config.subsample = 0;
  for (auto _ : state) {
    const auto result = train(src, config);
    benchmark::DoNotOptimize(result.embeddings.words.values().data());
  }
  state.SetItemsProcessed(state.iterations() * 20000);
}
BENCHMARK(BM_TrainSmall)->Unit(benchmark::kMillisecond);

void BM_Spearman(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0, 1);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::round(normal(rng) * 4);
    y[i] = normal(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(spearman(x, y));
}
BENCHMARK(BM_Spearman)->Arg(999)->Arg(100000);

}  // namespace
BENCHMARK_MAIN();
