#pragma once

#include <filesystem>
#include <string>

#include "depctx/conllu.hpp"
#include "depctx/experiment.hpp"

namespace depctx::testing {

std::filesystem::path data_path(const std::string& name);

// Unique directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// "Australian scientist discovers stars with telescope", UD v1 labels.
extern const char* const kTelescopeConllu;
// "boys and girls"
extern const char* const kBoysAndGirlsConllu;

Sentence telescope_sentence();
Sentence boys_and_girls_sentence();

// The bundled smoke experiment with work_dir (and cache) under `work_dir`.
ExperimentConfig smoke_config(const std::filesystem::path& work_dir);

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace depctx::testing
