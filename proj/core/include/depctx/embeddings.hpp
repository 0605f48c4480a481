#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "depctx/vocabulary.hpp"

namespace depctx {

// Labelled rows of a dense float matrix.
class VectorTable {
 public:
  VectorTable() = default;
  // `values` is row-major, labels.size() x dim. Throws ConfigError on a
  // size mismatch or duplicate label.
  VectorTable(int dim, std::vector<std::string> labels, std::vector<float> values);

  int dim() const { return dim_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  const std::string& label(std::size_t row) const { return labels_[row]; }
  const std::vector<std::string>& labels() const { return labels_; }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<float> row(std::size_t i) {
    return {values_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::optional<std::span<const float>> find(std::string_view label) const;
  bool contains(std::string_view label) const { return index_.contains(label); }

  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }

 private:
  int dim_ = 0;
  std::vector<std::string> labels_;
  std::vector<float> values_;
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> index_;
};

struct EmbeddingStore {
  VectorTable words;
  VectorTable contexts;
};

// word2vec text format: "count dim" header, then "label v1 ... vd" lines.
// Values are written with enough digits to round-trip a float exactly.
void save_vectors(const VectorTable& table, const std::filesystem::path& path);
// Throws FormatError naming the line on malformed input.
VectorTable load_vectors(const std::filesystem::path& path);

// Writes the word side to `path`; with `with_contexts`, also the context
// side to context_vectors_path(path).
void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path,
                     bool with_contexts = false);
EmbeddingStore load_embeddings(const std::filesystem::path& path);

// "vecs.txt" -> "vecs_ctx.txt"
std::filesystem::path context_vectors_path(const std::filesystem::path& path);

}  // namespace depctx
