#include "depctx/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "depctx/error.hpp"

namespace fs = std::filesystem;

namespace depctx {

VectorTable::VectorTable(int dim, std::vector<std::string> labels, std::vector<float> values)
    : dim_(dim), labels_(std::move(labels)), values_(std::move(values)) {
  if (dim_ < 1) throw ConfigError(fmt::format("vector dimension must be >= 1, got {}", dim_));
  if (values_.size() != labels_.size() * static_cast<std::size_t>(dim_)) {
    throw ConfigError(fmt::format("vector table holds {} values, expected {} x {}", values_.size(),
                                  labels_.size(), dim_));
  }
  index_.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second) {
      throw ConfigError("duplicate vector label '" + labels_[i] + "'");
    }
  }
}

std::optional<std::span<const float>> VectorTable::find(std::string_view label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return row(it->second);
}

void save_vectors(const VectorTable& table, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot write vectors to " + path.string());
  out << table.size() << ' ' << table.dim() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.label(i);
    for (float v : table.row(i)) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      out << ' ';
      out.write(buf, end - buf);
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw Error("I/O failure while writing " + path.string());
}

VectorTable load_vectors(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open vectors file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ":1: missing 'count dim' header");
  std::size_t count = 0;
  int dim = 0;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> count >> dim) || (header >> extra) || dim < 1) {
      throw FormatError(path.string() + ":1: malformed header, expected 'count dim'");
    }
  }
  std::vector<std::string> labels;
  std::vector<float> values;
  labels.reserve(count);
  values.reserve(count * static_cast<std::size_t>(dim));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    const char* label_end = std::find(p, end, ' ');
    labels.emplace_back(p, label_end);
    p = label_end;
    int found = 0;
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      float v = 0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw FormatError(fmt::format("{}:{}: invalid number in vector row", path.string(), line_no));
      }
      values.push_back(v);
      ++found;
      p = next;
    }
    if (found != dim) {
      throw FormatError(fmt::format("{}:{}: row has {} values, header says {}", path.string(), line_no,
                                    found, dim));
    }
  }
  if (labels.size() != count) {
    throw FormatError(fmt::format("{}: header announces {} rows, found {}", path.string(), count,
                                  labels.size()));
  }
  try {
    return VectorTable(dim, std::move(labels), std::move(values));
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

fs::path context_vectors_path(const fs::path& path) {
  fs::path out = path;
  out.replace_filename(path.stem().string() + "_ctx" + path.extension().string());
  return out;
}

void save_embeddings(const EmbeddingStore& store, const fs::path& path, bool with_contexts) {
  save_vectors(store.words, path);
  if (with_contexts) save_vectors(store.contexts, context_vectors_path(path));
}

EmbeddingStore load_embeddings(const fs::path& path) {
  EmbeddingStore store;
  store.words = load_vectors(path);
  if (fs::exists(context_vectors_path(path))) store.contexts = load_vectors(context_vectors_path(path));
  return store;
}

}  // namespace depctx
