#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cfta {

struct csv_row {
  std::vector<std::string> fields;
  std::size_t line{0};  // 1-based line number of the row's first line
};

struct csv_table {
  std::string name;
  std::vector<std::string> header;
  std::vector<csv_row> rows;

  std::optional<std::size_t> column(std::string_view col) const;
};

// RFC 4180 reader: quoted fields, CRLF or LF, optional UTF-8 BOM. Rows with
// invalid UTF-8, unterminated quotes or a field count different from the
// header raise errc::malformed_row naming `name` and the line.
csv_table parse_csv(std::string_view content, std::string name);

bool valid_utf8(std::string_view s);

// Quotes `f` when it contains a separator, quote or line break.
std::string csv_escape(std::string_view f);

// Writes one CRLF-terminated record, quoting fields where needed.
void write_csv_row(std::ostream& out, std::span<std::string const> fields);
void write_csv_row(std::ostream& out,
                   std::initializer_list<std::string_view> fields);

}  // namespace cfta
