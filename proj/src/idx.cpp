#include "ddlab/idx.hpp"

#include <array>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "ddlab/error.hpp"

namespace ddlab {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& buf, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > buf.size())
    throw LengthError(path.string() + ": header truncated at byte " + std::to_string(offset));
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void check_magic(const std::vector<std::uint8_t>& buf, std::uint32_t expected,
                 const std::filesystem::path& path) {
  if (buf.size() < 4)
    throw FormatError(path.string() + ": file shorter than the 4-byte magic number", 0);
  const std::array<std::uint8_t, 4> want = {
      static_cast<std::uint8_t>(expected >> 24), static_cast<std::uint8_t>(expected >> 16),
      static_cast<std::uint8_t>(expected >> 8), static_cast<std::uint8_t>(expected)};
  for (std::size_t i = 0; i < 4; ++i) {
    if (buf[i] != want[i]) {
      std::ostringstream msg;
      msg << path.string() << ": bad IDX magic at byte offset " << i << " (got 0x" << std::hex
          << static_cast<int>(buf[i]) << ", expected 0x" << static_cast<int>(want[i]) << ")";
      throw FormatError(msg.str(), static_cast<long>(i));
    }
  }
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(bytes, 4);
}

}  // namespace

IdxImages read_idx_images(const std::filesystem::path& path) {
  const auto buf = slurp(path);
  check_magic(buf, kImageMagic, path);
  IdxImages img;
  img.count = read_be32(buf, 4, path);
  img.rows = read_be32(buf, 8, path);
  img.cols = read_be32(buf, 12, path);
  const std::size_t need = std::size_t{img.count} * img.rows * img.cols;
  if (buf.size() - 16 < need)
    throw LengthError(path.string() + ": payload has " + std::to_string(buf.size() - 16) +
                      " bytes, header declares " + std::to_string(need));
  img.pixels.assign(buf.begin() + 16, buf.begin() + 16 + static_cast<std::ptrdiff_t>(need));
  return img;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  const auto buf = slurp(path);
  check_magic(buf, kLabelMagic, path);
  const std::uint32_t count = read_be32(buf, 4, path);
  if (buf.size() - 8 < count)
    throw LengthError(path.string() + ": payload has " + std::to_string(buf.size() - 8) +
                      " bytes, header declares " + std::to_string(count));
  return {buf.begin() + 8, buf.begin() + 8 + count};
}

void write_idx_images(const std::filesystem::path& path, const IdxImages& images) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  put_be32(out, kImageMagic);
  put_be32(out, images.count);
  put_be32(out, images.rows);
  put_be32(out, images.cols);
  out.write(reinterpret_cast<const char*>(images.pixels.data()),
            static_cast<std::streamsize>(images.pixels.size()));
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  put_be32(out, kLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

Matrix scale_pixels(const IdxImages& images) {
  const Eigen::Index n = images.count;
  const Eigen::Index d = Eigen::Index{images.rows} * images.cols;
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      x(i, j) = 2.0 * images.pixels[static_cast<std::size_t>(i * d + j)] / 255.0 - 1.0;
  return x;
}

LabeledImages load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const IdxImages img = read_idx_images(images);
  const auto lab = read_idx_labels(labels);
  if (lab.size() != img.count)
    throw ConsistencyError("image count " + std::to_string(img.count) +
                           " does not match label count " + std::to_string(lab.size()));
  return LabeledImages{scale_pixels(img), std::vector<int>(lab.begin(), lab.end())};
}

}  // namespace ddlab
