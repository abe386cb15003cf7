#include "cloudsort/error.hpp"

namespace cloudsort {

const char* errc_name(errc code) {
  switch (code) {
    case errc::malformed_header: return "MalformedHeader";
    case errc::unsupported_encoding: return "UnsupportedEncoding";
    case errc::field_mismatch: return "FieldMismatch";
    case errc::io_error: return "IoError";
    case errc::empty_cloud: return "EmptyCloud";
    case errc::too_few_points: return "TooFewPoints";
    case errc::no_valid_sample: return "NoValidSample";
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::empty_after_crop: return "EmptyAfterCrop";
    case errc::coincident_point: return "CoincidentPoint";
    case errc::parallel_direction: return "ParallelDirection";
    case errc::zero_centroid: return "ZeroCentroid";
    case errc::all_coincident: return "AllCoincident";
    case errc::single_class: return "SingleClass";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::malformed_model: return "MalformedModel";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::unknown_label: return "UnknownLabel";
    case errc::insufficient_frames: return "InsufficientFrames";
    case errc::wrong_video_count: return "WrongVideoCount";
    case errc::no_solutions: return "NoSolutions";
  }
  return "UnknownError";
}

Error::Error(errc code, const std::string& detail)
    : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

void fail(errc code, const std::string& detail) { throw Error(code, detail); }

}  // namespace cloudsort
