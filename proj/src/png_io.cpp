#include "edgeseg/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>

namespace edgeseg {

namespace {

struct FileCloser {
  std::FILE* fp = nullptr;
  ~FileCloser() {
    if (fp) std::fclose(fp);
  }
};

struct ReadCleanup {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~ReadCleanup() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

struct WriteCleanup {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~WriteCleanup() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

// Loads an 8-bit PNG with exactly the requested color type. Everything else
// is WrongPixelFormat; malformed files surface as NotAPng / IoError.
void load_png(const std::filesystem::path& path, int want_color_type, int want_channels,
              int& width, int& height, std::vector<std::uint8_t>& out) {
  FileCloser file;
  file.fp = std::fopen(path.string().c_str(), "rb");
  if (!file.fp) fail(Errc::file_not_found, path.string());

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    fail(Errc::not_a_png, path.string());

  ReadCleanup ctx;
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) fail(Errc::io_error, "png_create_read_struct failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) fail(Errc::io_error, "png_create_info_struct failed");

  // Declared before setjmp so unwinding from the throw below stays sound.
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(ctx.png))) fail(Errc::not_a_png, "corrupt PNG: " + path.string());

  png_init_io(ctx.png, file.fp);
  png_set_sig_bytes(ctx.png, 8);
  png_read_info(ctx.png, ctx.info);

  png_uint_32 w = 0, h = 0;
  int bit_depth = 0, color_type = 0;
  png_get_IHDR(ctx.png, ctx.info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);
  if (bit_depth != 8 || color_type != want_color_type)
    fail(Errc::wrong_pixel_format,
         path.string() + ": want 8-bit " +
             (want_color_type == PNG_COLOR_TYPE_GRAY ? "grayscale" : "RGB") + ", got bit depth " +
             std::to_string(bit_depth) + ", color type " + std::to_string(color_type));

  png_set_interlace_handling(ctx.png);
  png_read_update_info(ctx.png, ctx.info);
  if (png_get_rowbytes(ctx.png, ctx.info) != w * static_cast<png_uint_32>(want_channels))
    fail(Errc::wrong_pixel_format, path.string() + ": unexpected row size");

  width = static_cast<int>(w);
  height = static_cast<int>(h);
  out.assign(static_cast<std::size_t>(w) * h * want_channels, 0);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y)
    rows[y] = out.data() + static_cast<std::size_t>(y) * w * want_channels;
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);
}

void save_png(const std::filesystem::path& path, int color_type, int channels, int width,
              int height, const std::uint8_t* data) {
  if (width <= 0 || height <= 0) fail(Errc::io_error, "empty image");
  FileCloser file;
  file.fp = std::fopen(path.string().c_str(), "wb");
  if (!file.fp) fail(Errc::io_error, "cannot open for writing: " + path.string());

  WriteCleanup ctx;
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) fail(Errc::io_error, "png_create_write_struct failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) fail(Errc::io_error, "png_create_info_struct failed");

  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(ctx.png))) fail(Errc::io_error, "PNG write failed: " + path.string());

  png_init_io(ctx.png, file.fp);
  png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(data + static_cast<std::size_t>(y) * width * channels);
  png_write_image(ctx.png, rows.data());
  png_write_end(ctx.png, nullptr);
}

}  // namespace

Gray8 load_gray8(const std::filesystem::path& path) {
  Gray8 img;
  load_png(path, PNG_COLOR_TYPE_GRAY, 1, img.width, img.height, img.data);
  return img;
}

void save_gray8(const Gray8& img, const std::filesystem::path& path) {
  if (img.data.size() != static_cast<std::size_t>(img.width) * img.height)
    fail(Errc::dimension_mismatch, "gray8 data length does not match width*height");
  save_png(path, PNG_COLOR_TYPE_GRAY, 1, img.width, img.height, img.data.data());
}

LabelMap load_label_map(const std::filesystem::path& path) {
  Gray8 img = load_gray8(path);
  LabelMap map;
  map.width = img.width;
  map.height = img.height;
  map.data = std::move(img.data);
  validate(map);
  return map;
}

void save_label_map(const LabelMap& map, const std::filesystem::path& path) {
  validate(map);
  save_png(path, PNG_COLOR_TYPE_GRAY, 1, map.width, map.height, map.data.data());
}

RgbImage load_rgb_image(const std::filesystem::path& path) {
  RgbImage img;
  load_png(path, PNG_COLOR_TYPE_RGB, 3, img.width, img.height, img.data);
  return img;
}

void save_rgb_image(const RgbImage& image, const std::filesystem::path& path) {
  if (image.data.size() != image.pixel_count() * 3)
    fail(Errc::dimension_mismatch, "rgb data length does not match width*height*3");
  save_png(path, PNG_COLOR_TYPE_RGB, 3, image.width, image.height, image.data.data());
}

}  // namespace edgeseg
