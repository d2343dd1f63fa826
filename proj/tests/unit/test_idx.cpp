#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "ddlab/error.hpp"
#include "ddlab/idx.hpp"

using namespace ddlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "ddlab_idx_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

IdxImages tiny_images() {
  IdxImages img;
  img.count = 3;
  img.rows = 2;
  img.cols = 2;
  img.pixels = {0, 255, 128, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  return img;
}

}  // namespace

TEST_CASE("IDX images and labels round-trip") {
  const IdxImages img = tiny_images();
  write_idx_images(scratch("img"), img);
  const IdxImages back = read_idx_images(scratch("img"));
  CHECK(back.count == 3);
  CHECK(back.rows == 2);
  CHECK(back.cols == 2);
  CHECK(back.pixels == img.pixels);

  const std::vector<std::uint8_t> labels = {7, 0, 9};
  write_idx_labels(scratch("lab"), labels);
  CHECK(read_idx_labels(scratch("lab")) == labels);

  const LabeledImages li = load_idx(scratch("img"), scratch("lab"));
  CHECK(li.x.rows() == 3);
  CHECK(li.x.cols() == 4);
  CHECK(li.labels == std::vector<int>{7, 0, 9});
}

TEST_CASE("header layout is big-endian with the documented magic") {
  write_idx_labels(scratch("lab2"), {1, 2});
  std::ifstream in(scratch("lab2"), std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 10);
  CHECK(bytes[0] == 0x00);
  CHECK(bytes[1] == 0x00);
  CHECK(bytes[2] == 0x08);
  CHECK(bytes[3] == 0x01);
  CHECK(bytes[7] == 2);
}

TEST_CASE("scale_pixels maps [0,255] onto [-1,1]") {
  const Matrix x = scale_pixels(tiny_images());
  CHECK(x(0, 0) == -1.0);
  CHECK(x(0, 1) == 1.0);
  CHECK(x(0, 2) == doctest::Approx(2.0 * 128.0 / 255.0 - 1.0));
}

TEST_CASE("malformed IDX files are rejected") {
  write_bytes(scratch("short"), {0, 0});
  CHECK_THROWS_AS(read_idx_labels(scratch("short")), FormatError);

  write_bytes(scratch("magic"), {0, 0, 0x08, 0x02, 0, 0, 0, 1, 5});
  CHECK_THROWS_AS(read_idx_labels(scratch("magic")), FormatError);

  // Header claims 4 labels, payload holds 2.
  write_bytes(scratch("trunc"), {0, 0, 0x08, 0x01, 0, 0, 0, 4, 1, 2});
  CHECK_THROWS_AS(read_idx_labels(scratch("trunc")), LengthError);

  write_bytes(scratch("hdr"), {0, 0, 0x08, 0x03, 0, 0});
  CHECK_THROWS_AS(read_idx_images(scratch("hdr")), LengthError);

  write_idx_images(scratch("img3"), tiny_images());
  write_idx_labels(scratch("lab4"), {1, 2, 3, 4});
  CHECK_THROWS_AS(load_idx(scratch("img3"), scratch("lab4")), ConsistencyError);

  CHECK_THROWS_AS(read_idx_labels(scratch("does-not-exist")), Error);
}
