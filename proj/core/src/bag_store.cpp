#include "depctx/bag_store.hpp"

#include <charconv>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "depctx/error.hpp"
#include "depctx/hash.hpp"

namespace fs = std::filesystem;

namespace depctx {
namespace {

constexpr int kManifestFormat = 1;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(std::string_view text, const fs::path& path, std::size_t line_no) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError(fmt::format("{}:{}: expected an unsigned integer, got '{}'", path.string(),
                                  line_no, text));
  }
  return v;
}

}  // namespace

fs::path bag_file_path(const fs::path& dir, std::string_view bag) {
  return dir / (std::string(bag) + ".pairs");
}

std::string extraction_config_hash(const ExtractionConfig& config, const BagMappingTable& table) {
  ContentHasher h;
  h.add_field("format", std::to_string(kManifestFormat));
  h.add_field("window", std::to_string(config.window));
  h.add_field("conj_variant", to_string(config.conj_variant));
  h.add_field("collapse_prepositions", config.collapse_prepositions ? "1" : "0");
  h.add_field("collapse_obl", config.collapse_obl ? "1" : "0");
  h.add_field("baselines", config.baselines ? "1" : "0");
  h.add_field("table", table.to_text());
  return h.hex();
}

std::uint64_t BagManifest::count(std::string_view bag) const {
  auto it = counts.find(std::string(bag));
  if (it == counts.end()) {
    throw ConfigError(fmt::format("unknown context bag '{}': not present in the manifest", bag));
  }
  return it->second;
}

std::uint64_t BagManifest::total(const Configuration& config) const {
  std::uint64_t sum = 0;
  for (const auto& bag : config.bags()) sum += count(bag);
  return sum;
}

void BagManifest::save(const fs::path& path) const {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << "# depctx bag manifest\n";
    out << "format = " << kManifestFormat << '\n';
    out << "config_hash = " << config_hash << '\n';
    out << "input_hash = " << input_hash << '\n';
    out << "sentences = " << sentences << '\n';
    out << "skipped_sentences = " << skipped_sentences << '\n';
    for (const auto& [k, v] : params) out << "param." << k << " = " << v << '\n';
    for (const auto& [bag, n] : counts) out << "bag." << bag << " = " << n << '\n';
    out.flush();
    if (!out) throw Error("failed to write manifest " + tmp.string());
  }
  fs::rename(tmp, path);
}

BagManifest BagManifest::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  BagManifest m;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError(fmt::format("{}:{}: expected 'key = value'", path.string(), line_no));
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "format") {
      if (parse_u64(value, path, line_no) != kManifestFormat) {
        throw FormatError(fmt::format("{}: unsupported manifest format {}", path.string(), value));
      }
    } else if (key == "config_hash") {
      m.config_hash = value;
    } else if (key == "input_hash") {
      m.input_hash = value;
    } else if (key == "sentences") {
      m.sentences = parse_u64(value, path, line_no);
    } else if (key == "skipped_sentences") {
      m.skipped_sentences = parse_u64(value, path, line_no);
    } else if (key.starts_with("param.")) {
      m.params[std::string(key.substr(6))] = std::string(value);
    } else if (key.starts_with("bag.")) {
      m.counts[std::string(key.substr(4))] = parse_u64(value, path, line_no);
    } else {
      throw FormatError(fmt::format("{}:{}: unknown manifest key '{}'", path.string(), line_no, key));
    }
  }
  return m;
}

bool bag_directory_complete(const fs::path& dir) {
  return fs::exists(dir / kManifestFile) && !fs::exists(dir / kIncompleteMarker);
}

std::vector<std::string> output_bags(const BagMappingTable& table, const ExtractionConfig& config) {
  std::vector<std::string> bags = table.image();
  if (config.baselines) {
    bags.emplace_back(kBowBag);
    bags.emplace_back(kPositBag);
  }
  return bags;
}

BagWriter::BagWriter(fs::path out_dir, const BagMappingTable& table, ExtractionConfig config)
    : dir_(std::move(out_dir)), table_(table), config_(config) {
  config_.validate();
  fs::create_directories(dir_);
  {
    std::ofstream marker(dir_ / kIncompleteMarker, std::ios::trunc);
    marker << "extraction in progress or failed; rerun to regenerate\n";
    if (!marker) throw Error("cannot write to bag directory " + dir_.string());
  }
  fs::remove(dir_ / kManifestFile);
  for (const auto& bag : output_bags(table_, config_)) {
    auto& file = files_[bag];
    file.open(bag_file_path(dir_, bag), std::ios::trunc | std::ios::binary);
    if (!file) throw Error("cannot create bag file " + bag_file_path(dir_, bag).string());
    counts_[bag] = 0;
  }
  params_["window"] = std::to_string(config_.window);
  params_["conj_variant"] = std::string(to_string(config_.conj_variant));
  params_["collapse_prepositions"] = config_.collapse_prepositions ? "true" : "false";
  params_["collapse_obl"] = config_.collapse_obl ? "true" : "false";
  params_["baselines"] = config_.baselines ? "true" : "false";
}

BagWriter::~BagWriter() = default;

void BagWriter::write_pairs(const std::vector<DependencyPair>& pairs) {
  for (const auto& p : pairs) {
    auto it = files_.find(p.bag);
    if (it == files_.end()) throw std::logic_error("no bag file for label " + p.bag);
    it->second << p.word << '\t' << p.file_context() << '\n';
    ++counts_[p.bag];
  }
}

void BagWriter::add(const Sentence& sentence) {
  write_pairs(extract_sentence(sentence, table_, config_));
  ++sentences_;
}

void BagWriter::add_batch(std::span<const Sentence> batch, unsigned workers) {
  if (workers <= 1 || batch.size() < 2 * static_cast<std::size_t>(workers)) {
    for (const auto& s : batch) add(s);
    return;
  }
  std::vector<std::vector<DependencyPair>> extracted(batch.size());
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (batch.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(batch.size(), begin + chunk);
      if (begin >= end) break;
      threads.emplace_back([&, w, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) extracted[i] = extract_sentence(batch[i], table_, config_);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& pairs : extracted) write_pairs(pairs);
  sentences_ += batch.size();
}

BagManifest BagWriter::finish() {
  for (auto& [bag, file] : files_) {
    file.flush();
    if (!file) throw Error("I/O failure while writing bag file " + bag_file_path(dir_, bag).string());
    file.close();
  }
  BagManifest m;
  m.counts = counts_;
  m.params = params_;
  m.config_hash = extraction_config_hash(config_, table_);
  m.input_hash = input_hash_;
  m.sentences = sentences_;
  m.skipped_sentences = skipped_;
  m.save(dir_ / kManifestFile);
  fs::remove(dir_ / kIncompleteMarker);
  finished_ = true;
  return m;
}

BagPairStream::BagPairStream(std::vector<fs::path> files, std::uint64_t expected_pairs)
    : files_(std::move(files)), expected_(expected_pairs) {}

void BagPairStream::rewind() {
  file_index_ = 0;
  current_.reset();
  line_no_ = 0;
}

bool BagPairStream::open_next_file() {
  while (file_index_ < files_.size()) {
    current_ = std::make_unique<std::ifstream>(files_[file_index_], std::ios::binary);
    if (!*current_) throw ConfigError("cannot open bag file " + files_[file_index_].string());
    line_no_ = 0;
    ++file_index_;
    return true;
  }
  return false;
}

bool BagPairStream::next(PairView& pair) {
  while (true) {
    if (!current_ && !open_next_file()) return false;
    if (std::getline(*current_, line_)) {
      ++line_no_;
      const auto tab = line_.find('\t');
      if (tab == std::string::npos) {
        throw FormatError(fmt::format("{}:{}: expected 'word<TAB>context'",
                                      files_[file_index_ - 1].string(), line_no_));
      }
      pair.word = std::string_view(line_).substr(0, tab);
      pair.context = std::string_view(line_).substr(tab + 1);
      return true;
    }
    current_.reset();
  }
}

BagPairStream compose_configuration(const Configuration& config, const BagManifest& manifest,
                                    const fs::path& bag_dir) {
  std::vector<fs::path> files;
  for (const auto& bag : config.bags()) {
    manifest.count(bag);  // throws for unknown labels
    files.push_back(bag_file_path(bag_dir, bag));
  }
  return BagPairStream(std::move(files), manifest.total(config));
}

}  // namespace depctx
