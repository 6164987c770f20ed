#include "pif/error.hpp"

namespace pif {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::Unreadable: return "unreadable";
    case ErrorCode::UnsupportedFormat: return "unsupported_format";
    case ErrorCode::Decode: return "decode";
    case ErrorCode::ZeroDimension: return "zero_dimension";
    case ErrorCode::Io: return "io";
    case ErrorCode::DegenerateImage: return "degenerate_image";
    case ErrorCode::TypeMismatch: return "type_mismatch";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::VersionMismatch: return "version_mismatch";
    case ErrorCode::OutOfRange: return "out_of_range";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Conflict: return "conflict";
  }
  return "unknown";
}

}  // namespace pif
