#include "cfta/error.hpp"

namespace cfta {

std::string_view to_string(errc const c) {
  switch (c) {
    case errc::missing_file: return "MissingFile";
    case errc::malformed_row: return "MalformedRow";
    case errc::dangling_reference: return "DanglingReference";
    case errc::duplicate_prefix: return "DuplicatePrefix";
    case errc::degenerate_segment: return "DegenerateSegment";
    case errc::unresolved_selector: return "UnresolvedSelector";
    case errc::edit_conflict: return "EditConflict";
    case errc::instance_too_large: return "InstanceTooLarge";
    case errc::invalid_polygon: return "InvalidPolygon";
    case errc::empty_support: return "EmptySupport";
    case errc::empty_sample: return "EmptySample";
    case errc::zero_symmetric_norm: return "ZeroSymmetricNorm";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::io_error: return "IOError";
  }
  return "Unknown";
}

}  // namespace cfta
