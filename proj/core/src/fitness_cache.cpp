#include "depctx/fitness_cache.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "depctx/error.hpp"

namespace fs = std::filesystem;

namespace depctx {
namespace {

constexpr std::size_t kFields = 8;

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

template <class T>
bool parse_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::string FitnessCache::format_record(const FitnessRecord& r) {
  return fmt::format("{}\t{}\t{}\t{:.17g}\t{:.6f}\t{}\t{}\t{}", r.experiment, r.configuration, r.fold, r.rho,
                     r.wall_seconds, r.pairs, r.n_scored, r.n_total);
}

std::optional<FitnessRecord> FitnessCache::parse_record(const std::string& line) {
  const auto cols = split_tabs(line);
  if (cols.size() != kFields) return std::nullopt;
  FitnessRecord r;
  r.experiment = cols[0];
  r.configuration = cols[1];
  r.fold = cols[2];
  if (r.experiment.empty() || r.configuration.empty() || r.fold.empty()) return std::nullopt;
  if (!parse_number(cols[3], r.rho) || std::isnan(r.rho)) return std::nullopt;
  if (!parse_number(cols[4], r.wall_seconds)) return std::nullopt;
  if (!parse_number(cols[5], r.pairs)) return std::nullopt;
  if (!parse_number(cols[6], r.n_scored)) return std::nullopt;
  if (!parse_number(cols[7], r.n_total)) return std::nullopt;
  return r;
}

FitnessCache::FitnessCache(fs::path path) : path_(std::move(path)) {
  bool needs_newline = false;
  if (fs::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw ConfigError("cannot read fitness cache " + path_.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const bool last = in.eof();  // no trailing newline: possibly torn
      if (line.empty()) continue;
      auto r = parse_record(line);
      if (!r) {
        if (last) {
          needs_newline = true;
          spdlog::warn("{}: ignoring incomplete last record", path_.string());
        } else {
          spdlog::warn("{}:{}: skipping malformed cache record", path_.string(), line_no);
        }
        continue;
      }
      if (last) needs_newline = true;
      Key key{r->experiment, r->configuration, r->fold};
      if (records_.try_emplace(key, *r).second) order_.push_back(std::move(key));
    }
  } else if (path_.has_parent_path()) {
    fs::create_directories(path_.parent_path());
  }
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) throw ConfigError("cannot open fitness cache " + path_.string() + " for writing");
  if (needs_newline) out_ << '\n' << std::flush;
}

std::optional<FitnessRecord> FitnessCache::lookup(const std::string& experiment,
                                                  const std::string& configuration,
                                                  const std::string& fold) const {
  std::shared_lock lock(mutex_);
  auto it = records_.find(Key{experiment, configuration, fold});
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

bool FitnessCache::insert(const FitnessRecord& record) {
  std::unique_lock lock(mutex_);
  Key key{record.experiment, record.configuration, record.fold};
  if (records_.contains(key)) return false;
  out_ << format_record(record) << '\n';
  out_.flush();
  if (!out_) throw Error("failed to append to fitness cache " + path_.string());
  records_.emplace(key, record);
  order_.push_back(std::move(key));
  return true;
}

std::vector<FitnessRecord> FitnessCache::records() const {
  std::shared_lock lock(mutex_);
  std::vector<FitnessRecord> out;
  out.reserve(order_.size());
  for (const auto& k : order_) out.push_back(records_.at(k));
  return out;
}

std::vector<FitnessRecord> FitnessCache::records_for(const std::string& experiment) const {
  std::shared_lock lock(mutex_);
  std::vector<FitnessRecord> out;
  for (const auto& k : order_) {
    if (std::get<0>(k) == experiment) out.push_back(records_.at(k));
  }
  return out;
}

std::size_t FitnessCache::size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

}  // namespace depctx
