#pragma once

#include <stdexcept>
#include <string>

namespace cloudsort {

// Error conditions raised across the library. The names are stable strings
// that appear verbatim in CLI diagnostics and tests.
enum class errc {
  malformed_header,
  unsupported_encoding,
  field_mismatch,
  io_error,
  empty_cloud,
  too_few_points,
  no_valid_sample,
  index_out_of_range,
  empty_after_crop,
  coincident_point,
  parallel_direction,
  zero_centroid,
  all_coincident,
  single_class,
  dimension_mismatch,
  malformed_model,
  length_mismatch,
  unknown_label,
  insufficient_frames,
  wrong_video_count,
  no_solutions,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& detail);

  errc code() const { return code_; }
  const char* name() const { return errc_name(code_); }

 private:
  errc code_;
};

[[noreturn]] void fail(errc code, const std::string& detail);

}  // namespace cloudsort
