#include <doctest.h>
#include <png.h>

#include <cstdio>
#include <fstream>

#include "edgeseg/png_io.hpp"
#include "edgeseg/rng.hpp"
#include "test_util.hpp"

using namespace edgeseg;
using testutil::TempDir;

namespace {

// Writes a PNG with an arbitrary color type / bit depth, to exercise the
// loaders' format rejection.
void write_png_as(const std::filesystem::path& path, int width, int height, int color_type,
                  int bit_depth, int channels) {
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  REQUIRE(fp != nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  REQUIRE(setjmp(png_jmpbuf(png)) == 0);
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(width) * channels * (bit_depth / 8), 0);
  for (int y = 0; y < height; ++y) png_write_row(png, row.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("label map round-trip is bit-exact") {
  TempDir dir("core_roundtrip");
  Pcg32 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    LabelMap map = testutil::random_label_map(rng);
    auto path = dir / ("m" + std::to_string(trial) + ".png");
    save_label_map(map, path);
    LabelMap loaded = load_label_map(path);
    REQUIRE(loaded.width == map.width);
    REQUIRE(loaded.height == map.height);
    REQUIRE(loaded.data == map.data);
  }
}

TEST_CASE("rgb image round-trip is bit-exact") {
  TempDir dir("core_rgb");
  Pcg32 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    RgbImage img = testutil::random_image(rng, rng.uniform_int(1, 24), rng.uniform_int(1, 24));
    auto path = dir / ("i" + std::to_string(trial) + ".png");
    save_rgb_image(img, path);
    RgbImage loaded = load_rgb_image(path);
    REQUIRE(loaded.width == img.width);
    REQUIRE(loaded.height == img.height);
    REQUIRE(loaded.data == img.data);
  }
}

TEST_CASE("all-zero 4x4 label map loads as zeros") {
  TempDir dir("core_zeros");
  save_label_map(LabelMap(4, 4, 0), dir / "z.png");
  LabelMap loaded = load_label_map(dir / "z.png");
  CHECK(loaded.width == 4);
  CHECK(loaded.height == 4);
  for (auto v : loaded.data) CHECK(v == 0);
}

TEST_CASE("1x1 map stores the raw class value") {
  TempDir dir("core_1x1");
  save_label_map(LabelMap(1, 1, 7), dir / "c7.png");
  Gray8 raw = load_gray8(dir / "c7.png");
  REQUIRE(raw.data.size() == 1);
  CHECK(raw.data[0] == 7);
}

TEST_CASE("class id 19 is rejected with its position") {
  TempDir dir("core_badid");
  Gray8 bad{2, 2, {19, 0, 0, 0}};
  save_gray8(bad, dir / "bad.png");
  try {
    load_label_map(dir / "bad.png");
    FAIL("expected InvalidClassId");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_class_id);
    CHECK(std::string(e.what()).find("19") != std::string::npos);
    CHECK(std::string(e.what()).find("(0, 0)") != std::string::npos);
  }
}

TEST_CASE("ignore value 255 is accepted") {
  TempDir dir("core_ignore");
  LabelMap map(3, 3, 0);
  map.at(1, 1) = kIgnoreLabel;
  save_label_map(map, dir / "ig.png");
  CHECK(load_label_map(dir / "ig.png").at(1, 1) == kIgnoreLabel);
}

TEST_CASE("missing file is FileNotFound") {
  CHECK_THROWS_WITH_AS(load_label_map("/nonexistent/nope.png"), doctest::Contains("nope"), Error);
  try {
    load_label_map("/nonexistent/nope.png");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::file_not_found);
  }
}

TEST_CASE("non-PNG bytes are NotAPng") {
  TempDir dir("core_junk");
  std::ofstream(dir / "junk.png") << "this is not a png";
  try {
    load_label_map(dir / "junk.png");
    FAIL("expected NotAPng");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_a_png);
  }
}

TEST_CASE("RGBA PNG is WrongPixelFormat for the rgb loader") {
  TempDir dir("core_rgba");
  write_png_as(dir / "rgba.png", 2, 2, PNG_COLOR_TYPE_RGBA, 8, 4);
  try {
    load_rgb_image(dir / "rgba.png");
    FAIL("expected WrongPixelFormat");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::wrong_pixel_format);
  }
}

TEST_CASE("16-bit grayscale is WrongPixelFormat for the label loader") {
  TempDir dir("core_16bit");
  write_png_as(dir / "deep.png", 2, 2, PNG_COLOR_TYPE_GRAY, 16, 1);
  try {
    load_label_map(dir / "deep.png");
    FAIL("expected WrongPixelFormat");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::wrong_pixel_format);
  }
}

TEST_CASE("RGB PNG is WrongPixelFormat for the label loader") {
  TempDir dir("core_rgblab");
  save_rgb_image(RgbImage(2, 2), dir / "rgb.png");
  try {
    load_label_map(dir / "rgb.png");
    FAIL("expected WrongPixelFormat");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::wrong_pixel_format);
  }
}

TEST_CASE("empty path save is IoError") {
  try {
    save_label_map(LabelMap(1, 1, 0), "");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io_error);
  }
}

TEST_CASE("save validates class ids instead of repairing them") {
  TempDir dir("core_badsave");
  LabelMap map(2, 1, 0);
  map.data[1] = 42;
  CHECK_THROWS_AS(save_label_map(map, dir / "x.png"), Error);
}

}  // TEST_SUITE
