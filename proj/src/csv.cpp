#include "cfta/csv.hpp"

#include <algorithm>

#include "fmt/format.h"

#include "cfta/error.hpp"

namespace cfta {

std::optional<std::size_t> csv_table::column(std::string_view const col) const {
  auto const it = std::find(begin(header), end(header), col);
  if (it == end(header)) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(std::distance(begin(header), it));
}

bool valid_utf8(std::string_view const s) {
  auto i = std::size_t{0};
  while (i < s.size()) {
    auto const c = static_cast<unsigned char>(s[i]);
    auto len = 0;
    auto cp = 0U;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) {
      return false;
    }
    for (auto k = 1; k < len; ++k) {
      auto const cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) {
        return false;
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong encodings, surrogates, out of range
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

csv_table parse_csv(std::string_view content, std::string name) {
  auto table = csv_table{};
  table.name = std::move(name);
  if (content.starts_with("\xEF\xBB\xBF")) {
    content.remove_prefix(3);
  }

  auto const fail = [&](std::size_t const line, std::string_view why) {
    throw error{errc::malformed_row,
                fmt::format("{} line {}: {}", table.name, line, why)};
  };

  auto pos = std::size_t{0};
  auto line = std::size_t{1};
  auto first = true;
  while (pos < content.size()) {
    auto row = csv_row{.fields = {}, .line = line};
    auto field = std::string{};
    auto row_start = pos;
    auto done = false;
    while (!done) {
      if (pos < content.size() && content[pos] == '"') {
        ++pos;
        while (true) {
          if (pos >= content.size()) {
            fail(row.line, "unterminated quoted field");
          }
          if (content[pos] == '"') {
            if (pos + 1 < content.size() && content[pos + 1] == '"') {
              field += '"';
              pos += 2;
              continue;
            }
            ++pos;
            break;
          }
          if (content[pos] == '\n') {
            ++line;
          }
          field += content[pos++];
        }
      }
      while (pos < content.size() && content[pos] != ',' &&
             content[pos] != '\n' && content[pos] != '\r') {
        field += content[pos++];
      }
      row.fields.push_back(std::move(field));
      field.clear();
      if (pos >= content.size()) {
        done = true;
      } else if (content[pos] == ',') {
        ++pos;
      } else {
        if (content[pos] == '\r') {
          ++pos;
        }
        if (pos < content.size() && content[pos] == '\n') {
          ++pos;
        }
        ++line;
        done = true;
      }
    }

    if (!valid_utf8(content.substr(row_start, pos - row_start))) {
      fail(row.line, "invalid UTF-8");
    }
    if (row.fields.size() == 1 && row.fields.front().empty()) {
      continue;  // blank line
    }
    for (auto& f : row.fields) {
      if (first) {
        // header names are commonly padded
        f.erase(0, f.find_first_not_of(' '));
        f.erase(f.find_last_not_of(' ') + 1);
      }
    }
    if (first) {
      table.header = std::move(row.fields);
      first = false;
      continue;
    }
    if (row.fields.size() != table.header.size()) {
      fail(row.line, fmt::format("expected {} fields, got {}",
                                 table.header.size(), row.fields.size()));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string csv_escape(std::string_view const f) {
  if (f.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string{f};
  }
  auto out = std::string{"\""};
  for (auto const c : f) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
  return out;
}

namespace {

void write_field(std::ostream& out, std::string_view const f) { out << csv_escape(f); }

}  // namespace

void write_csv_row(std::ostream& out, std::span<std::string const> fields) {
  auto sep = false;
  for (auto const& f : fields) {
    if (sep) {
      out << ',';
    }
    write_field(out, f);
    sep = true;
  }
  out << "\r\n";
}

void write_csv_row(std::ostream& out,
                   std::initializer_list<std::string_view> fields) {
  auto sep = false;
  for (auto const f : fields) {
    if (sep) {
      out << ',';
    }
    write_field(out, f);
    sep = true;
  }
  out << "\r\n";
}

}  // namespace cfta
