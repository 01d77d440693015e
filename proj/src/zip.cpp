#include "cfta/zip.hpp"

#include <cstdint>
#include <fstream>
#include <iterator>
#include <vector>

#include "fmt/format.h"
#include "zlib.h"

#include "cfta/error.hpp"

namespace cfta {

namespace {

constexpr std::uint32_t local_sig = 0x04034b50;
constexpr std::uint32_t central_sig = 0x02014b50;
constexpr std::uint32_t eocd_sig = 0x06054b50;

std::uint16_t u16(std::string const& b, std::size_t const off) {
  if (off + 2 > b.size()) {
    throw error{errc::io_error, "truncated zip archive"};
  }
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[off]) |
                                    (static_cast<unsigned char>(b[off + 1]) << 8));
}

std::uint32_t u32(std::string const& b, std::size_t const off) {
  return static_cast<std::uint32_t>(u16(b, off)) |
         (static_cast<std::uint32_t>(u16(b, off + 2)) << 16);
}

void put16(std::string& b, std::uint16_t const v) {
  b += static_cast<char>(v & 0xFF);
  b += static_cast<char>((v >> 8) & 0xFF);
}

void put32(std::string& b, std::uint32_t const v) {
  put16(b, static_cast<std::uint16_t>(v & 0xFFFF));
  put16(b, static_cast<std::uint16_t>(v >> 16));
}

std::string inflate_raw(std::string_view const in, std::size_t const out_size) {
  auto out = std::string(out_size, '\0');
  auto zs = z_stream{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) {
    throw error{errc::io_error, "inflateInit2 failed"};
  }
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  auto const rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != out_size) {
    throw error{errc::io_error, "corrupt deflate stream in zip member"};
  }
  return out;
}

std::string deflate_raw(std::string_view const in) {
  auto zs = z_stream{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8,
                   Z_DEFAULT_STRATEGY) != Z_OK) {
    throw error{errc::io_error, "deflateInit2 failed"};
  }
  auto out = std::string(deflateBound(&zs, static_cast<uLong>(in.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  auto const rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) {
    throw error{errc::io_error, "deflate failed"};
  }
  out.resize(zs.total_out);
  return out;
}

}  // namespace

std::map<std::string, std::string> read_zip(std::filesystem::path const& p) {
  auto in = std::ifstream{p, std::ios::binary};
  if (!in) {
    throw error{errc::missing_file, p.string()};
  }
  auto const buf = std::string{std::istreambuf_iterator<char>{in}, {}};

  auto eocd = std::string::npos;
  for (auto i = buf.size() >= 22 ? buf.size() - 22 : std::string::npos;
       i != std::string::npos; --i) {
    if (u32(buf, i) == eocd_sig) {
      eocd = i;
      break;
    }
    if (i == 0 || buf.size() - i > 22 + 0xFFFF) {
      break;
    }
  }
  if (eocd == std::string::npos) {
    throw error{errc::io_error, fmt::format("{}: not a zip archive", p.string())};
  }

  auto const n_entries = u16(buf, eocd + 10);
  auto off = static_cast<std::size_t>(u32(buf, eocd + 16));
  auto members = std::map<std::string, std::string>{};
  for (auto e = 0U; e < n_entries; ++e) {
    if (u32(buf, off) != central_sig) {
      throw error{errc::io_error, "bad central directory entry"};
    }
    auto const method = u16(buf, off + 10);
    auto const crc = u32(buf, off + 16);
    auto const csize = u32(buf, off + 20);
    auto const usize = u32(buf, off + 24);
    auto const name_len = u16(buf, off + 28);
    auto const extra_len = u16(buf, off + 30);
    auto const comment_len = u16(buf, off + 32);
    auto const local = static_cast<std::size_t>(u32(buf, off + 42));
    auto name = buf.substr(off + 46, name_len);
    off += 46 + name_len + extra_len + comment_len;

    if (name.ends_with('/')) {
      continue;
    }
    if (u32(buf, local) != local_sig) {
      throw error{errc::io_error, "bad local header"};
    }
    auto const data = local + 30 + u16(buf, local + 26) + u16(buf, local + 28);
    if (data + csize > buf.size()) {
      throw error{errc::io_error, "truncated zip member"};
    }
    auto const raw = std::string_view{buf}.substr(data, csize);
    auto content = std::string{};
    if (method == 0) {
      content = std::string{raw};
    } else if (method == 8) {
      content = inflate_raw(raw, usize);
    } else {
      throw error{errc::io_error,
                  fmt::format("unsupported zip compression method {}", method)};
    }
    if (crc32(0L, reinterpret_cast<Bytef const*>(content.data()),
              static_cast<uInt>(content.size())) != crc) {
      throw error{errc::io_error, fmt::format("CRC mismatch in {}", name)};
    }
    if (auto const slash = name.rfind('/'); slash != std::string::npos) {
      name = name.substr(slash + 1);
    }
    members.emplace(std::move(name), std::move(content));
  }
  return members;
}

void write_zip(std::filesystem::path const& p,
               std::map<std::string, std::string> const& members) {
  constexpr std::uint16_t dos_date = (0 << 9) | (1 << 5) | 1;  // 1980-01-01
  auto out = std::string{};
  auto central = std::string{};
  for (auto const& [name, content] : members) {
    auto const crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<Bytef const*>(content.data()),
              static_cast<uInt>(content.size())));
    auto const packed = deflate_raw(content);
    auto const offset = static_cast<std::uint32_t>(out.size());

    put32(out, local_sig);
    put16(out, 20);
    put16(out, 0);
    put16(out, 8);
    put16(out, 0);
    put16(out, dos_date);
    put32(out, crc);
    put32(out, static_cast<std::uint32_t>(packed.size()));
    put32(out, static_cast<std::uint32_t>(content.size()));
    put16(out, static_cast<std::uint16_t>(name.size()));
    put16(out, 0);
    out += name;
    out += packed;

    put32(central, central_sig);
    put16(central, 20);
    put16(central, 20);
    put16(central, 0);
    put16(central, 8);
    put16(central, 0);
    put16(central, dos_date);
    put32(central, crc);
    put32(central, static_cast<std::uint32_t>(packed.size()));
    put32(central, static_cast<std::uint32_t>(content.size()));
    put16(central, static_cast<std::uint16_t>(name.size()));
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put32(central, 0);
    put32(central, offset);
    central += name;
  }
  auto const cd_offset = static_cast<std::uint32_t>(out.size());
  out += central;
  put32(out, eocd_sig);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(members.size()));
  put16(out, static_cast<std::uint16_t>(members.size()));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, cd_offset);
  put16(out, 0);

  auto f = std::ofstream{p, std::ios::binary | std::ios::trunc};
  if (!f) {
    throw error{errc::io_error, fmt::format("cannot write {}", p.string())};
  }
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace cfta
