#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace depctx {

// Stable 64-bit FNV-1a digest used for content hashes in manifests and
// cache keys. Not cryptographic.
class ContentHasher {
 public:
  ContentHasher& add(std::string_view bytes);
  ContentHasher& add_field(std::string_view key, std::string_view value);
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t value);

}  // namespace depctx
