#pragma once

#include <filesystem>
#include <istream>
#include <memory>

namespace depctx {

// Opens a text file for reading. Gzip input is recognised by its magic
// bytes (1f 8b) and decompressed on the fly; anything else is read as-is.
// Throws ConfigError if the file cannot be opened.
std::unique_ptr<std::istream> open_text_input(const std::filesystem::path& path);

bool is_gzip_file(const std::filesystem::path& path);

}  // namespace depctx
