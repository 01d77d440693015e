#pragma once

#include <optional>

#include "cfta/error.hpp"

namespace cfta::test {

// The error code thrown by `fn`, or nullopt when it returns normally.
template <typename Fn>
std::optional<errc> thrown_code(Fn&& fn) {
  try {
    fn();
  } catch (error const& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace cfta::test
