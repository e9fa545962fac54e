#pragma once

#include <stdexcept>
#include <string>

namespace edgeseg {

enum class Errc {
  file_not_found,
  not_a_png,
  wrong_pixel_format,
  invalid_class_id,
  io_error,
  dimension_mismatch,
  out_of_bounds,
  degenerate_size,
  channel_mismatch,
  shape_mismatch,
  no_valid_pixels,
  empty_donor_pool,
  pred_contains_ignore,
  all_classes_undefined,
  invalid_config,
};

const char* errc_name(Errc code);

// Exception carrying a machine-checkable error code next to the human message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace edgeseg
