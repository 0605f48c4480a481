#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>

#include "depctx/bag_store.hpp"
#include "depctx/sgns.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace depctx;
using namespace depctx::testing;

namespace {

MemoryPairSource telescope_pairs(int copies) {
  MemoryPairSource src;
  const auto pairs = extract_deps_pairs(collapse_prepositions(telescope_sentence()), BagMappingTable::defaults());
  for (int i = 0; i < copies; ++i) {
    for (const auto& p : pairs) src.add(p.word, p.file_context());
  }
  return src;
}

MemoryPairSource from_planted(const PlantedCorpus& corpus) {
  MemoryPairSource src;
  for (const auto& [w, c] : corpus.pairs) src.add(w, c);
  return src;
}

TrainerConfig small_config() {
  TrainerConfig c;
  c.dim = 16;
  c.negatives = 5;
  c.epochs = 3;
  c.min_count = 1;
  c.subsample = 0;
  c.seed = 9;
  return c;
}

}  // namespace

TEST(Vocab, MinCountBoundary) {
  auto count_words = [](int copies) {
    auto src = telescope_pairs(copies);
    std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>> counts;
    PairView p;
    while (src.next(p)) ++counts[std::string(p.word)];
    return counts;
  };
  // australian occurs once per sentence copy (one amod-1 pair)
  const auto v99 = Vocabulary::from_counts(count_words(99), 100);
  EXPECT_FALSE(v99.find("australian"));
  EXPECT_TRUE(v99.find("discovers"));  // three pairs per copy

  auto at_100 = telescope_pairs(100);
  auto v100 = build_vocab(at_100, 100);
  ASSERT_TRUE(v100.words.find("australian"));
  EXPECT_EQ(v100.words.count(*v100.words.find("australian")), 100u);
  EXPECT_EQ(v100.words.count(*v100.words.find("discovers")), 300u);
  EXPECT_EQ(v100.words.size(), 5u);  // every content word; "with" was collapsed away
  EXPECT_TRUE(v100.contexts.find("telescope_prep"));

  // every context occurs once per copy, so 99 copies leave none
  auto at_99 = telescope_pairs(99);
  EXPECT_THROW(build_vocab(at_99, 100), ConfigError);
}

TEST(Vocab, IdsOrderedByCountThenToken) {
  MemoryPairSource src({{"b", "x"}, {"a", "x"}, {"c", "y"}, {"c", "y"}});
  const auto v = build_vocab(src, 1);
  EXPECT_EQ(v.words.tokens(), (std::vector<std::string>{"c", "a", "b"}));
  EXPECT_EQ(v.contexts.tokens(), (std::vector<std::string>{"x", "y"}));
}

TEST(Vocab, EmptyAfterFilteringIsAConfigError) {
  MemoryPairSource empty;
  EXPECT_THROW(build_vocab(empty, 1), ConfigError);
  auto few = telescope_pairs(3);
  EXPECT_THROW(build_vocab(few, 100), ConfigError);
  EXPECT_THROW(train(empty, small_config()), ConfigError);
}

TEST(Subsampling, DiscardProbability) {
  EXPECT_NEAR(subsample_discard_probability(0.01, 1e-4), 0.9, 1e-12);
  EXPECT_EQ(subsample_discard_probability(1e-5, 1e-4), 0.0);
  EXPECT_EQ(subsample_discard_probability(1e-4, 1e-4), 0.0);
}

TEST(Subsampling, MonteCarloKeepRate) {
  const std::vector<std::uint64_t> counts = {1, 99};  // id 0 has frequency 0.01
  const Subsampler s(counts, 1e-4);
  EXPECT_NEAR(s.keep_probability(0), 0.1, 1e-12);
  Rng rng(123);
  const int n = 200000;
  int kept = 0;
  for (int i = 0; i < n; ++i) kept += s.keep(0, rng) ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(kept) / n, 0.1, 0.01);

  const Subsampler off(counts, 0);
  EXPECT_EQ(off.keep_probability(0), 1.0);
}

TEST(AliasSampler, ChiSquaredGoodnessOfFit) {
  const std::vector<std::uint64_t> counts = {500, 200, 120, 80, 50, 30, 10, 6, 3, 1};
  const auto sampler = make_negative_sampler(counts, 0.75);
  std::vector<double> expected_p(counts.size());
  double z = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) z += std::pow(static_cast<double>(counts[i]), 0.75);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    expected_p[i] = std::pow(static_cast<double>(counts[i]), 0.75) / z;
    EXPECT_NEAR(sampler.probability(static_cast<std::uint32_t>(i)), expected_p[i], 1e-12);
  }
  Rng rng(77);
  const int n = 1000000;
  std::vector<double> observed(counts.size(), 0);
  for (int i = 0; i < n; ++i) observed[sampler.sample(rng)] += 1;
  double chi2 = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = expected_p[i] * n;
    chi2 += (observed[i] - e) * (observed[i] - e) / e;
  }
  const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  const double p_value = boost::math::cdf(boost::math::complement(dist, chi2));
  EXPECT_GT(p_value, 0.01) << "chi2 = " << chi2;
}

TEST(AliasSampler, RejectsBadWeights) {
  const std::vector<double> zero = {0, 0};
  const std::vector<double> negative = {1, -1};
  EXPECT_THROW(AliasSampler{zero}, ConfigError);
  EXPECT_THROW(AliasSampler{negative}, ConfigError);
  const std::vector<double> single = {3};
  Rng rng(1);
  EXPECT_EQ(AliasSampler(single).sample(rng), 0u);
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 0.5);
  const int dim = 10, k = 5;
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> w(dim), c(dim), neg(static_cast<std::size_t>(dim * k));
    for (auto* v : {&w, &c, &neg}) {
      for (double& x : *v) x = normal(rng);
    }
    std::vector<double> gw(dim), gc(dim), gn(neg.size());
    pair_gradient<double>(w, c, neg, gw, gc, gn);
    std::vector<double> all = gw;
    all.insert(all.end(), gc.begin(), gc.end());
    all.insert(all.end(), gn.begin(), gn.end());
    worst = std::max(worst, max_gradient_error(w, c, neg, all));
    const long double oracle = oracle_pair_loss({w.begin(), w.end()}, {c.begin(), c.end()}, {neg.begin(), neg.end()});
    EXPECT_NEAR(pair_loss<double>(w, c, neg), static_cast<double>(oracle), 1e-12);
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Gradient, SgdStepIsMinusLrTimesGradient) {
  std::mt19937_64 rng(18);
  std::normal_distribution<double> normal(0.0, 0.5);
  const int dim = 8, k = 3;
  std::vector<double> w(dim), c(dim), neg(static_cast<std::size_t>(dim * k));
  for (auto* v : {&w, &c, &neg}) {
    for (double& x : *v) x = normal(rng);
  }
  std::vector<double> gw(dim), gc(dim), gn(neg.size());
  pair_gradient<double>(w, c, neg, gw, gc, gn);
  const double loss = pair_loss<double>(w, c, neg);

  auto w2 = w, c2 = c, n2 = neg;
  std::vector<double*> targets = {c2.data()};
  for (int j = 0; j < k; ++j) targets.push_back(n2.data() + j * dim);
  std::vector<double> scratch(dim);
  const double lr = 0.05;
  const double step_loss = sgd_pair_step<double>(w2.data(), targets, dim, lr, scratch.data());
  EXPECT_NEAR(step_loss, loss, 1e-12);
  for (int i = 0; i < dim; ++i) {
    EXPECT_NEAR(w2[i], w[i] - lr * gw[i], 1e-12);
    EXPECT_NEAR(c2[i], c[i] - lr * gc[i], 1e-12);
  }
  for (std::size_t i = 0; i < neg.size(); ++i) EXPECT_NEAR(n2[i], neg[i] - lr * gn[i], 1e-12);
}

TEST(Sigmoid, StableAtExtremes) {
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_NEAR(neg_log_sigmoid(-1000.0), 1000.0, 1e-9);
  EXPECT_NEAR(neg_log_sigmoid(0.0), std::log(2.0), 1e-15);
  EXPECT_TRUE(std::isfinite(neg_log_sigmoid(1000.0)));
}

TEST(Training, PlantedClustersSeparate) {
  const auto corpus = planted_corpus(1, 30000);
  auto src = from_planted(corpus);
  TrainerConfig config = small_config();
  config.epochs = 5;
  const auto result = train(src, config);
  EXPECT_GE(cluster_gap(result.embeddings.words, corpus), 0.2);
  EXPECT_EQ(result.stats.input_pairs, 30000u);
  EXPECT_EQ(result.stats.retained_pairs, 30000u);
  EXPECT_EQ(result.stats.trained_pairs, 5u * 30000u);
}

TEST(Training, SingleWorkerIsDeterministic) {
  const auto corpus = planted_corpus(2, 5000);
  auto a_src = from_planted(corpus);
  auto b_src = from_planted(corpus);
  const auto a = train(a_src, small_config());
  const auto b = train(b_src, small_config());
  ASSERT_EQ(a.embeddings.words.labels(), b.embeddings.words.labels());
  const auto va = a.embeddings.words.values();
  const auto vb = b.embeddings.words.values();
  EXPECT_TRUE(std::equal(va.begin(), va.end(), vb.begin(), vb.end()));

  TrainerConfig other = small_config();
  other.seed = 10;
  auto c_src = from_planted(corpus);
  const auto c = train(c_src, other);
  const auto vc = c.embeddings.words.values();
  EXPECT_FALSE(std::equal(va.begin(), va.end(), vc.begin(), vc.end()));
}

TEST(Training, StreamedAndInMemoryAgree) {
  const auto corpus = planted_corpus(3, 4000);
  auto a_src = from_planted(corpus);
  auto b_src = from_planted(corpus);
  TrainerConfig streamed = small_config();
  streamed.max_in_memory_pairs = 10;
  const auto a = train(a_src, small_config());
  const auto b = train(b_src, streamed);
  const auto va = a.embeddings.words.values();
  const auto vb = b.embeddings.words.values();
  EXPECT_TRUE(std::equal(va.begin(), va.end(), vb.begin(), vb.end()));
}

TEST(Training, LossDecreasesAndValuesStayBounded) {
  const auto corpus = planted_corpus(4, 20000);
  auto src = from_planted(corpus);
  TrainerConfig config = small_config();
  config.epochs = 3;
  const auto result = train(src, config);
  ASSERT_EQ(result.stats.epoch_loss.size(), 3u);
  EXPECT_GE(result.stats.epoch_loss[0], result.stats.epoch_loss[1]);
  EXPECT_GE(result.stats.epoch_loss[1], result.stats.epoch_loss[2]);
  for (const auto* table : {&result.embeddings.words, &result.embeddings.contexts}) {
    for (float x : table->values()) {
      EXPECT_TRUE(std::isfinite(x));
      EXPECT_LT(std::abs(x), 1e3F);
    }
  }
}

TEST(Training, MultipleWorkersStillLearn) {
  const auto corpus = planted_corpus(5, 20000);
  auto src = from_planted(corpus);
  TrainerConfig config = small_config();
  config.workers = 3;
  config.epochs = 5;
  const auto result = train(src, config);
  EXPECT_GE(cluster_gap(result.embeddings.words, corpus), 0.2);
  for (float x : result.embeddings.words.values()) ASSERT_TRUE(std::isfinite(x));
  for (float x : result.embeddings.contexts.values()) ASSERT_TRUE(std::isfinite(x));
}

TEST(Training, ShapesMatchVocabularies) {
  const auto corpus = planted_corpus(7, 3000);
  auto src = from_planted(corpus);
  const auto result = train(src, small_config());
  EXPECT_EQ(result.embeddings.words.size(), result.vocab.words.size());
  EXPECT_EQ(result.embeddings.contexts.size(), result.vocab.contexts.size());
  EXPECT_EQ(result.embeddings.words.labels(), result.vocab.words.tokens());
  EXPECT_EQ(result.embeddings.words.dim(), 16);
}

TEST(Training, ShuffledPairOrderStaysFinite) {
  auto corpus = planted_corpus(8, 10000);
  std::mt19937_64 rng(8);
  for (int round = 0; round < 3; ++round) {
    std::shuffle(corpus.pairs.begin(), corpus.pairs.end(), rng);
    auto src = from_planted(corpus);
    const auto result = train(src, small_config());
    for (double loss : result.stats.epoch_loss) EXPECT_TRUE(std::isfinite(loss));
    for (float x : result.embeddings.words.values()) ASSERT_TRUE(std::isfinite(x));
    EXPECT_GE(cluster_gap(result.embeddings.words, corpus), 0.2);
  }
}

TEST(Training, HashIgnoresWorkersOnly) {
  TrainerConfig a, b;
  b.workers = 8;
  EXPECT_EQ(a.hash(), b.hash());
  b.dim = 299;
  EXPECT_NE(a.hash(), b.hash());
  TrainerConfig c;
  c.initial_lr = 0.0250000001;
  EXPECT_NE(a.hash(), c.hash());
}

TEST(Training, InvalidConfig) {
  TrainerConfig c;
  c.dim = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.negatives = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.initial_lr = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.epochs = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Embeddings, SaveLoadRoundTripIsExact) {
  TempDir dir;
  const auto corpus = planted_corpus(6, 2000);
  auto src = from_planted(corpus);
  const auto result = train(src, small_config());
  save_embeddings(result.embeddings, dir / "vecs.txt", true);
  const auto back = load_embeddings(dir / "vecs.txt");
  EXPECT_EQ(back.words.labels(), result.embeddings.words.labels());
  EXPECT_EQ(back.words.dim(), 16);
  const auto a = result.embeddings.words.values();
  const auto b = back.words.values();
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  EXPECT_EQ(back.contexts.size(), result.embeddings.contexts.size());
  EXPECT_EQ(context_vectors_path(dir / "vecs.txt"), dir / "vecs_ctx.txt");
}

TEST(Embeddings, MalformedFilesNameTheLine) {
  TempDir dir;
  write_file(dir / "bad.txt", "2 3\na 1 2 3\nb 1 2\n");
  try {
    load_vectors(dir / "bad.txt");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  write_file(dir / "count.txt", "3 2\na 1 2\n");
  EXPECT_THROW(load_vectors(dir / "count.txt"), FormatError);
  write_file(dir / "nan.txt", "1 2\na 1 x\n");
  EXPECT_THROW(load_vectors(dir / "nan.txt"), FormatError);
  write_file(dir / "empty.txt", "");
  EXPECT_THROW(load_vectors(dir / "empty.txt"), FormatError);
  EXPECT_THROW(load_vectors(dir / "missing.txt"), ConfigError);
}

TEST(Embeddings, TableRejectsBadShapes) {
  EXPECT_THROW(VectorTable(2, {"a"}, {1.0F}), ConfigError);
  EXPECT_THROW(VectorTable(1, {"a", "a"}, {1.0F, 2.0F}), ConfigError);
}
