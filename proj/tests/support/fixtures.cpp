#include "support/fixtures.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include <fmt/format.h>

namespace fs = std::filesystem;

namespace depctx::testing {

const char* const kTelescopeConllu =
    "1\tAustralian\taustralian\tADJ\t_\t_\t2\tamod\t_\t_\n"
    "2\tscientist\tscientist\tNOUN\t_\t_\t3\tnsubj\t_\t_\n"
    "3\tdiscovers\tdiscover\tVERB\t_\t_\t0\troot\t_\t_\n"
    "4\tstars\tstar\tNOUN\t_\t_\t3\tdobj\t_\t_\n"
    "5\twith\twith\tADP\t_\t_\t6\tcase\t_\t_\n"
    "6\ttelescope\ttelescope\tNOUN\t_\t_\t3\tnmod\t_\t_\n"
    "\n";

const char* const kBoysAndGirlsConllu =
    "1\tboys\tboy\tNOUN\t_\t_\t0\troot\t_\t_\n"
    "2\tand\tand\tCONJ\t_\t_\t3\tcc\t_\t_\n"
    "3\tgirls\tgirl\tNOUN\t_\t_\t1\tconj\t_\t_\n"
    "\n";

fs::path data_path(const std::string& name) { return fs::path(DEPCTX_TEST_DATA) / name; }

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  path_ = fs::temp_directory_path() / fmt::format("depctx-test-{}-{}-{}", ::getpid(), stamp, counter++);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Sentence telescope_sentence() { return parse_conllu(kTelescopeConllu).at(0); }
Sentence boys_and_girls_sentence() { return parse_conllu(kBoysAndGirlsConllu).at(0); }

ExperimentConfig smoke_config(const fs::path& work_dir) {
  ExperimentConfig config = ExperimentConfig::load(data_path("smoke.conf"));
  config.work_dir = work_dir;
  config.cache_dir = work_dir / "cache";
  return config;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace depctx::testing
