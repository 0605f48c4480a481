#include "depctx/sgns.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <optional>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "depctx/hash.hpp"

namespace depctx {

void TrainerConfig::validate() const {
  if (dim < 1) throw ConfigError(fmt::format("dim must be >= 1, got {}", dim));
  if (negatives < 1) throw ConfigError(fmt::format("negatives must be >= 1, got {}", negatives));
  if (!(initial_lr > 0) || !std::isfinite(initial_lr)) {
    throw ConfigError(fmt::format("initial learning rate must be positive, got {}", initial_lr));
  }
  if (epochs < 1) throw ConfigError(fmt::format("epochs must be >= 1, got {}", epochs));
  if (!std::isfinite(unigram_power)) throw ConfigError("unigram_power must be finite");
  if (!std::isfinite(subsample)) throw ConfigError("subsample rate must be finite");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

std::string TrainerConfig::hash() const {
  ContentHasher h;
  h.add_field("dim", std::to_string(dim));
  h.add_field("negatives", std::to_string(negatives));
  h.add_field("initial_lr", fmt::format("{:.17g}", initial_lr));
  h.add_field("subsample", fmt::format("{:.17g}", subsample));
  h.add_field("epochs", std::to_string(epochs));
  h.add_field("min_count", std::to_string(min_count));
  h.add_field("unigram_power", fmt::format("{:.17g}", unigram_power));
  h.add_field("seed", std::to_string(seed));
  h.add_field("subsample_contexts", subsample_contexts ? "1" : "0");
  return h.hex();
}

double subsample_discard_probability(double frequency, double t) {
  if (t <= 0 || frequency <= 0) return 0.0;
  return std::max(0.0, 1.0 - std::sqrt(t / frequency));
}

Subsampler::Subsampler(std::span<const std::uint64_t> counts, double t) : keep_(counts.size(), 1.0) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total <= 0) return;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    keep_[i] = 1.0 - subsample_discard_probability(static_cast<double>(counts[i]) / total, t);
  }
}

std::vector<EncodedPair> subsample(std::span<const EncodedPair> pairs, const Vocabulary& words,
                                   double t, std::uint64_t seed) {
  const Subsampler sampler(words.counts(), t);
  Rng rng(seed);
  std::vector<EncodedPair> kept;
  for (const auto& p : pairs) {
    if (sampler.keep(p.word, rng)) kept.push_back(p);
  }
  return kept;
}

AliasSampler::AliasSampler(std::span<const double> weights)
    : prob_(weights.size(), 0.0), alias_(weights.size(), 0) {
  const std::size_t n = weights.size();
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (n == 0 || !(sum > 0) || !std::isfinite(sum)) {
    throw ConfigError("alias sampler needs non-negative weights with a positive, finite sum");
  }
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] < 0) throw ConfigError("alias sampler weights must be non-negative");
    scaled[i] = weights[i] * static_cast<double>(n) / sum;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto i : large) prob_[i] = 1.0, alias_[i] = i;
  for (auto i : small) prob_[i] = 1.0, alias_[i] = i;  // rounding leftovers
}

std::uint32_t AliasSampler::sample(Rng& rng) const {
  const auto i = static_cast<std::uint32_t>(rng.below(prob_.size()));
  return rng.uniform() < prob_[i] ? i : alias_[i];
}

double AliasSampler::probability(std::uint32_t i) const {
  double mass = prob_[i];
  for (std::size_t j = 0; j < prob_.size(); ++j) {
    if (alias_[j] == i && j != i) mass += 1.0 - prob_[j];
  }
  return mass / static_cast<double>(prob_.size());
}

AliasSampler make_negative_sampler(std::span<const std::uint64_t> counts, double power) {
  std::vector<double> weights(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    weights[i] = std::pow(static_cast<double>(counts[i]), power);
  }
  return AliasSampler(weights);
}

template <std::floating_point T>
T pair_loss(std::span<const T> word, std::span<const T> context, std::span<const T> negatives) {
  const std::size_t d = word.size();
  auto dot = [&](std::span<const T> other) {
    T s = 0;
    for (std::size_t i = 0; i < d; ++i) s += word[i] * other[i];
    return s;
  };
  T loss = neg_log_sigmoid(dot(context));
  for (std::size_t k = 0; k * d < negatives.size(); ++k) {
    loss += neg_log_sigmoid(-dot(negatives.subspan(k * d, d)));
  }
  return loss;
}

template <std::floating_point T>
void pair_gradient(std::span<const T> word, std::span<const T> context, std::span<const T> negatives,
                   std::span<T> grad_word, std::span<T> grad_context, std::span<T> grad_negatives) {
  const std::size_t d = word.size();
  auto dot = [&](std::span<const T> other) {
    T s = 0;
    for (std::size_t i = 0; i < d; ++i) s += word[i] * other[i];
    return s;
  };
  std::fill(grad_word.begin(), grad_word.end(), T(0));
  // dL/df for the positive term is -(1 - s(f)); for a negative it is s(f).
  const T pos = -(T(1) - sigmoid(dot(context)));
  for (std::size_t i = 0; i < d; ++i) {
    grad_word[i] += pos * context[i];
    grad_context[i] = pos * word[i];
  }
  for (std::size_t k = 0; k * d < negatives.size(); ++k) {
    const auto row = negatives.subspan(k * d, d);
    const T neg = sigmoid(dot(row));
    for (std::size_t i = 0; i < d; ++i) {
      grad_word[i] += neg * row[i];
      grad_negatives[k * d + i] = neg * word[i];
    }
  }
}

template float pair_loss<float>(std::span<const float>, std::span<const float>, std::span<const float>);
template double pair_loss<double>(std::span<const double>, std::span<const double>, std::span<const double>);
template void pair_gradient<float>(std::span<const float>, std::span<const float>, std::span<const float>,
                                   std::span<float>, std::span<float>, std::span<float>);
template void pair_gradient<double>(std::span<const double>, std::span<const double>,
                                    std::span<const double>, std::span<double>, std::span<double>,
                                    std::span<double>);

namespace {

constexpr double kMinLrFraction = 1e-4;
constexpr std::size_t kStreamChunk = std::size_t{1} << 20;
constexpr std::uint64_t kProgressFlush = 1024;

struct Model {
  int dim;
  std::vector<float> words;
  std::vector<float> contexts;

  float* word_row(std::uint32_t id) { return words.data() + static_cast<std::size_t>(id) * dim; }
  float* context_row(std::uint32_t id) { return contexts.data() + static_cast<std::size_t>(id) * dim; }
};

struct WorkerState {
  explicit WorkerState(std::uint64_t seed, const TrainerConfig& config)
      : rng(seed), scratch(static_cast<std::size_t>(config.dim)),
        targets(static_cast<std::size_t>(config.negatives) + 1) {}

  Rng rng;
  std::vector<float> scratch;
  std::vector<float*> targets;
  double loss = 0.0;
  std::uint64_t trained = 0;
};

class Trainer {
 public:
  Trainer(const TrainerConfig& config, const PairVocabulary& vocab, std::uint64_t retained)
      : config_(config),
        negatives_(make_negative_sampler(vocab.contexts.counts(), config.unigram_power)),
        word_sub_(vocab.words.counts(), config.subsample),
        total_updates_(static_cast<double>(retained) * config.epochs) {
    if (config.subsample_contexts) context_sub_.emplace(vocab.contexts.counts(), config.subsample);
    const auto d = static_cast<std::size_t>(config.dim);
    model_.dim = config.dim;
    model_.words.resize(vocab.words.size() * d);
    model_.contexts.assign(vocab.contexts.size() * d, 0.0f);
    Rng init(config.seed);
    for (auto& v : model_.words) v = static_cast<float>((init.uniform() - 0.5) / config.dim);
    for (unsigned w = 0; w < config.workers; ++w) {
      workers_.emplace_back(config.seed + 0x9E3779B97F4A7C15ULL * (w + 1), config);
    }
  }

  void process(std::span<const EncodedPair> batch) {
    if (config_.workers == 1) {
      run_slice<DirectAccess>(batch, workers_[0]);
      return;
    }
    std::vector<std::exception_ptr> errors(config_.workers);
    {
      std::vector<std::jthread> threads;
      const std::size_t chunk = (batch.size() + config_.workers - 1) / config_.workers;
      for (unsigned w = 0; w < config_.workers; ++w) {
        const std::size_t begin = std::min(batch.size(), w * chunk);
        const std::size_t end = std::min(batch.size(), begin + chunk);
        threads.emplace_back([this, w, &errors, slice = batch.subspan(begin, end - begin)] {
          try {
            run_slice<RelaxedAccess>(slice, workers_[w]);
          } catch (...) {
            errors[w] = std::current_exception();
            abort_.store(true);
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Mean loss since the last call.
  double take_epoch_loss(TrainStats& stats) {
    double loss = 0.0;
    std::uint64_t n = 0;
    for (auto& w : workers_) {
      loss += w.loss;
      n += w.trained;
      w.loss = 0.0;
      w.trained = 0;
    }
    stats.trained_pairs += n;
    return n == 0 ? 0.0 : loss / static_cast<double>(n);
  }

  void check_finite(int epoch) const {
    auto finite = [](const std::vector<float>& v) {
      return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
    };
    if (!finite(model_.words) || !finite(model_.contexts)) {
      throw TrainingDiverged(fmt::format(
          "non-finite embedding entry after epoch {} (initial_lr={}, dim={}); lower the learning rate",
          epoch + 1, config_.initial_lr, config_.dim));
    }
  }

  Model& model() { return model_; }

 private:
  template <class Access>
  void run_slice(std::span<const EncodedPair> slice, WorkerState& state) {
    const int d = config_.dim;
    const auto n_neg = static_cast<std::size_t>(config_.negatives);
    std::uint64_t unflushed = 0;
    for (const EncodedPair& p : slice) {
      if (abort_.load(std::memory_order_relaxed)) return;
      const double done = static_cast<double>(processed_.load(std::memory_order_relaxed) + unflushed);
      ++unflushed;
      if (unflushed == kProgressFlush) {
        processed_.fetch_add(unflushed, std::memory_order_relaxed);
        unflushed = 0;
      }
      if (!word_sub_.keep(p.word, state.rng)) continue;
      if (context_sub_ && !context_sub_->keep(p.context, state.rng)) continue;
      const double lr =
          config_.initial_lr * std::max(kMinLrFraction, 1.0 - done / (total_updates_ + 1.0));
      state.targets[0] = model_.context_row(p.context);
      for (std::size_t k = 1; k <= n_neg; ++k) {
        state.targets[k] = model_.context_row(negatives_.sample(state.rng));
      }
      const float loss = sgd_pair_step<float, Access>(model_.word_row(p.word), state.targets, d,
                                                      static_cast<float>(lr), state.scratch.data());
      if (!std::isfinite(loss)) {
        throw TrainingDiverged(fmt::format(
            "non-finite loss after {} updates (lr={:.6g}, initial_lr={}, dim={}); lower the learning rate",
            static_cast<std::uint64_t>(done), lr, config_.initial_lr, d));
      }
      state.loss += loss;
      ++state.trained;
    }
    processed_.fetch_add(unflushed, std::memory_order_relaxed);
  }

  const TrainerConfig& config_;
  Model model_;
  AliasSampler negatives_;
  Subsampler word_sub_;
  std::optional<Subsampler> context_sub_;
  double total_updates_;
  std::vector<WorkerState> workers_;
  std::atomic<std::uint64_t> processed_{0};
  std::atomic<bool> abort_{false};
};

}  // namespace

TrainResult train(PairSource& pairs, const TrainerConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  TrainResult result;
  result.vocab = build_vocab(pairs, config.min_count);
  const PairVocabulary& vocab = result.vocab;

  auto encode = [&](const PairView& pair) -> std::optional<EncodedPair> {
    auto w = vocab.words.find(pair.word);
    if (!w) return std::nullopt;
    auto c = vocab.contexts.find(pair.context);
    if (!c) return std::nullopt;
    return EncodedPair{*w, *c};
  };

  std::vector<EncodedPair> encoded;
  bool in_memory = true;
  std::uint64_t retained = 0;
  pairs.rewind();
  PairView pair;
  while (pairs.next(pair)) {
    ++result.stats.input_pairs;
    auto e = encode(pair);
    if (!e) continue;
    ++retained;
    if (!in_memory) continue;
    if (encoded.size() >= config.max_in_memory_pairs) {
      in_memory = false;
      std::vector<EncodedPair>().swap(encoded);
      continue;
    }
    encoded.push_back(*e);
  }
  result.stats.retained_pairs = retained;
  if (retained == 0) throw ConfigError("no training pairs left after vocabulary filtering");
  spdlog::debug("training on {} of {} pairs, {} words, {} contexts{}", retained,
                result.stats.input_pairs, vocab.words.size(), vocab.contexts.size(),
                in_memory ? "" : " (streaming)");

  Trainer trainer(config, vocab, retained);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (in_memory) {
      trainer.process(encoded);
    } else {
      std::vector<EncodedPair> chunk;
      chunk.reserve(kStreamChunk);
      pairs.rewind();
      while (pairs.next(pair)) {
        if (auto e = encode(pair)) chunk.push_back(*e);
        if (chunk.size() == kStreamChunk) {
          trainer.process(chunk);
          chunk.clear();
        }
      }
      trainer.process(chunk);
    }
    result.stats.epoch_loss.push_back(trainer.take_epoch_loss(result.stats));
    trainer.check_finite(epoch);
  }

  const int d = config.dim;
  result.embeddings.words = VectorTable(d, vocab.words.tokens(), std::move(trainer.model().words));
  result.embeddings.contexts = VectorTable(d, vocab.contexts.tokens(), std::move(trainer.model().contexts));
  result.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace depctx
