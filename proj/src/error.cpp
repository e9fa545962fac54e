#include "edgeseg/error.hpp"

namespace edgeseg {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::file_not_found: return "FileNotFound";
    case Errc::not_a_png: return "NotAPng";
    case Errc::wrong_pixel_format: return "WrongPixelFormat";
    case Errc::invalid_class_id: return "InvalidClassId";
    case Errc::io_error: return "IoError";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::out_of_bounds: return "OutOfBounds";
    case Errc::degenerate_size: return "DegenerateSize";
    case Errc::channel_mismatch: return "ChannelMismatch";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::no_valid_pixels: return "NoValidPixels";
    case Errc::empty_donor_pool: return "EmptyDonorPool";
    case Errc::pred_contains_ignore: return "PredContainsIgnore";
    case Errc::all_classes_undefined: return "AllClassesUndefined";
    case Errc::invalid_config: return "InvalidConfig";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace edgeseg
