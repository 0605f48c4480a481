#pragma once

// Skip-gram with negative sampling over arbitrary (word, context) pairs.
//
// Every positive pair (w, c) gets one logistic-loss SGD step against c and
// `negatives` contexts drawn from the context unigram distribution raised
// to `unigram_power`. The learning rate decays linearly from initial_lr to
// initial_lr * 1e-4 over epochs * retained pairs. Word vectors start
// uniform in [-0.5/d, 0.5/d], context vectors at zero.

#include <atomic>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "depctx/embeddings.hpp"
#include "depctx/error.hpp"
#include "depctx/pair_source.hpp"
#include "depctx/random.hpp"
#include "depctx/vocabulary.hpp"

namespace depctx {

struct TrainerConfig {
  int dim = 300;
  int negatives = 15;
  double initial_lr = 0.025;
  double subsample = 1e-4;  // t; <= 0 disables subsampling
  int epochs = 15;
  std::uint64_t min_count = 100;
  double unigram_power = 0.75;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  bool subsample_contexts = false;
  // Above this many retained pairs the stream is re-read every epoch
  // instead of being held in memory as ids.
  std::uint64_t max_in_memory_pairs = std::uint64_t{1} << 28;

  void validate() const;  // throws ConfigError
  // Content hash of every setting that affects the trained vectors.
  // `workers` is excluded: only single-worker runs are reproducible anyway.
  std::string hash() const;
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

struct EncodedPair {
  std::uint32_t word;
  std::uint32_t context;
  friend bool operator==(const EncodedPair&, const EncodedPair&) = default;
};

struct TrainStats {
  std::uint64_t input_pairs = 0;     // pairs in the stream
  std::uint64_t retained_pairs = 0;  // both sides in the vocabulary
  std::uint64_t trained_pairs = 0;   // survived subsampling, summed over epochs
  std::vector<double> epoch_loss;    // mean per-pair loss of each epoch
  double wall_seconds = 0.0;
};

struct TrainResult {
  EmbeddingStore embeddings;
  PairVocabulary vocab;
  TrainStats stats;
};

// Throws ConfigError for an invalid config or an empty vocabulary, and
// TrainingDiverged if a non-finite value shows up.
TrainResult train(PairSource& pairs, const TrainerConfig& config);

// Probability of dropping an occurrence of a token with relative frequency
// `frequency`: max(0, 1 - sqrt(t / frequency)).
double subsample_discard_probability(double frequency, double t);

class Subsampler {
 public:
  // Frequencies are count / sum(counts). t <= 0 keeps everything.
  Subsampler(std::span<const std::uint64_t> counts, double t);
  double keep_probability(std::uint32_t id) const { return keep_[id]; }
  bool keep(std::uint32_t id, Rng& rng) const { return keep_[id] >= 1.0 || rng.uniform() < keep_[id]; }

 private:
  std::vector<double> keep_;
};

// Drops each pair with the discard probability of its word.
std::vector<EncodedPair> subsample(std::span<const EncodedPair> pairs, const Vocabulary& words,
                                   double t, std::uint64_t seed);

// Walker/Vose alias table: O(1) draws from a discrete distribution.
class AliasSampler {
 public:
  AliasSampler() = default;
  // Weights must be non-negative with a positive sum.
  explicit AliasSampler(std::span<const double> weights);
  std::uint32_t sample(Rng& rng) const;
  std::size_t size() const { return prob_.size(); }
  // Normalised probability of outcome i, reconstructed from the table.
  double probability(std::uint32_t i) const;

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

// Negative-sampling distribution: counts^power.
AliasSampler make_negative_sampler(std::span<const std::uint64_t> counts, double power);

// Numerically stable logistic function.
template <std::floating_point T>
T sigmoid(T x) {
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

// -log sigmoid(x), stable for large |x|.
template <std::floating_point T>
T neg_log_sigmoid(T x) {
  return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

// Loss of one positive pair with fixed negatives:
//   L = -log s(w.c) - sum_k log s(-w.n_k)
// `negatives` holds k rows of length word.size(), back to back.
template <std::floating_point T>
T pair_loss(std::span<const T> word, std::span<const T> context, std::span<const T> negatives);

// Analytic gradient of pair_loss with respect to every argument.
template <std::floating_point T>
void pair_gradient(std::span<const T> word, std::span<const T> context,
                   std::span<const T> negatives, std::span<T> grad_word,
                   std::span<T> grad_context, std::span<T> grad_negatives);

// Plain loads and stores, for single-worker training.
struct DirectAccess {
  template <class T>
  static T load(const T& x) {
    return x;
  }
  template <class T>
  static void store(T& x, T v) {
    x = v;
  }
};

// Relaxed atomic loads and stores, for lock-free multi-worker training.
// Concurrent updates may be lost but never tear a value.
struct RelaxedAccess {
  template <class T>
  static T load(const T& x) {
    return std::atomic_ref<T>(const_cast<T&>(x)).load(std::memory_order_relaxed);
  }
  template <class T>
  static void store(T& x, T v) {
    std::atomic_ref<T>(x).store(v, std::memory_order_relaxed);
  }
};

// One SGD step for a positive pair. targets[0] is the positive context row,
// the rest are negatives; a negative aliasing targets[0] is skipped. Context
// rows are updated in order against the unmodified word row, then the word
// row takes its accumulated update, so for distinct rows this is exactly
// x -= lr * dL/dx. `scratch` needs `dim` elements. Returns the loss before
// the step.
template <std::floating_point T, class Access = DirectAccess>
T sgd_pair_step(T* word, std::span<T* const> targets, int dim, T lr, T* scratch) {
  for (int i = 0; i < dim; ++i) scratch[i] = 0;
  T loss = 0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    T* ctx = targets[k];
    if (k > 0 && ctx == targets[0]) continue;
    T f = 0;
    for (int i = 0; i < dim; ++i) f += Access::load(word[i]) * Access::load(ctx[i]);
    const bool positive = k == 0;
    // (label - s(f)) is -dL/df
    const T coeff = (positive ? T(1) : T(0)) - sigmoid(f);
    loss += positive ? neg_log_sigmoid(f) : neg_log_sigmoid(-f);
    const T g = coeff * lr;
    for (int i = 0; i < dim; ++i) scratch[i] += g * Access::load(ctx[i]);
    for (int i = 0; i < dim; ++i) Access::store(ctx[i], Access::load(ctx[i]) + g * Access::load(word[i]));
  }
  for (int i = 0; i < dim; ++i) Access::store(word[i], Access::load(word[i]) + scratch[i]);
  return loss;
}

}  // namespace depctx
