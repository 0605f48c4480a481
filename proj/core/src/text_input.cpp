#include "depctx/text_input.hpp"

#include <zlib.h>

#include <array>
#include <fstream>
#include <streambuf>

#include "depctx/error.hpp"

namespace depctx {
namespace {

class GzipStreamBuf : public std::streambuf {
 public:
  explicit GzipStreamBuf(gzFile file) : file_(file) {}
  ~GzipStreamBuf() override { gzclose(file_); }
  GzipStreamBuf(const GzipStreamBuf&) = delete;
  GzipStreamBuf& operator=(const GzipStreamBuf&) = delete;

 protected:
  int_type underflow() override {
    if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
    const int n = gzread(file_, buffer_.data(), static_cast<unsigned>(buffer_.size()));
    if (n < 0) {
      int errnum = 0;
      throw FormatError(std::string("gzip read failed: ") + gzerror(file_, &errnum));
    }
    if (n == 0) return traits_type::eof();
    setg(buffer_.data(), buffer_.data(), buffer_.data() + n);
    return traits_type::to_int_type(*gptr());
  }

 private:
  gzFile file_;
  std::array<char, 1 << 16> buffer_{};
};

class GzipInputStream : public std::istream {
 public:
  explicit GzipInputStream(gzFile file) : std::istream(nullptr), buf_(file) { rdbuf(&buf_); }

 private:
  GzipStreamBuf buf_;
};

}  // namespace

bool is_gzip_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char magic[2] = {0, 0};
  in.read(reinterpret_cast<char*>(magic), 2);
  return in.gcount() == 2 && magic[0] == 0x1f && magic[1] == 0x8b;
}

std::unique_ptr<std::istream> open_text_input(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError("cannot open input file: " + path.string());
  }
  if (is_gzip_file(path)) {
    gzFile file = gzopen(path.c_str(), "rb");
    if (file == nullptr) throw ConfigError("cannot open gzip file: " + path.string());
    gzbuffer(file, 1 << 17);
    return std::make_unique<GzipInputStream>(file);
  }
  auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*in) throw ConfigError("cannot open input file: " + path.string());
  return in;
}

}  // namespace depctx
