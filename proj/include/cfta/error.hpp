#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cfta {

enum class errc {
  missing_file,
  malformed_row,
  dangling_reference,
  duplicate_prefix,
  degenerate_segment,
  unresolved_selector,
  edit_conflict,
  instance_too_large,
  invalid_polygon,
  empty_support,
  empty_sample,
  zero_symmetric_norm,
  invalid_argument,
  io_error
};

std::string_view to_string(errc);

// All data-level failures raised by the library. The CLI maps these to exit
// code 2.
class error : public std::runtime_error {
public:
  error(errc code, std::string const& what)
      : std::runtime_error{std::string{to_string(code)} + ": " + what},
        code_{code} {}

  errc code() const noexcept { return code_; }

private:
  errc code_;
};

}  // namespace cfta
