#include "depctx/hash.hpp"

#include <fmt/format.h>

namespace depctx {

ContentHasher& ContentHasher::add(std::string_view bytes) {
  for (unsigned char c : bytes) {
    state_ ^= c;
    state_ *= 0x100000001b3ULL;
  }
  return *this;
}

ContentHasher& ContentHasher::add_field(std::string_view key, std::string_view value) {
  // Length-prefix both parts so ("ab","c") and ("a","bc") differ.
  add(fmt::format("{}:", key.size())).add(key);
  add(fmt::format("{}:", value.size())).add(value);
  return *this;
}

std::string ContentHasher::hex() const { return to_hex(state_); }

std::string to_hex(std::uint64_t value) { return fmt::format("{:016x}", value); }

}  // namespace depctx
