#include "cfta/io.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "fmt/format.h"
#include "openssl/evp.h"

#include "cfta/error.hpp"

namespace cfta {

std::string read_file(std::filesystem::path const& p) {
  auto in = std::ifstream{p, std::ios::binary};
  if (!in) {
    throw error{errc::missing_file, p.string()};
  }
  auto ss = std::ostringstream{};
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file_atomic(std::filesystem::path const& p, std::string_view const content) {
  if (p.has_parent_path()) {
    std::filesystem::create_directories(p.parent_path());
  }
  auto tmp = p;
  tmp += ".tmp";
  {
    auto out = std::ofstream{tmp, std::ios::binary | std::ios::trunc};
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw error{errc::io_error, "cannot write " + tmp.string()};
    }
  }
  std::filesystem::rename(tmp, p);
}

std::string sha256_hex(std::string_view const bytes) {
  auto md = std::array<unsigned char, EVP_MAX_MD_SIZE>{};
  auto len = 0U;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw error{errc::io_error, "SHA-256 failed"};
  }
  auto out = std::string{};
  out.reserve(2 * len);
  for (auto i = 0U; i != len; ++i) {
    fmt::format_to(std::back_inserter(out), "{:02x}", md[i]);
  }
  return out;
}

std::string sha256_file(std::filesystem::path const& p) { return sha256_hex(read_file(p)); }

}  // namespace cfta
