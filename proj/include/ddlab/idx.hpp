#pragma once

// Reader and writer for the big-endian IDX format used by MNIST-style
// datasets: magic 0x00000803 (3-D unsigned byte tensor) for images and
// 0x00000801 (1-D) for labels.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ddlab/linalg.hpp"

namespace ddlab {

struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major
};

IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

void write_idx_images(const std::filesystem::path& path, const IdxImages& images);
void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

/// Pixels u in [0,255] become 2u/255 - 1, one flattened image per row.
Matrix scale_pixels(const IdxImages& images);

struct LabeledImages {
  Matrix x;                 // n x d in [-1, 1]
  std::vector<int> labels;  // length n
};

/// Reads both files and checks that counts agree.
LabeledImages load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

}  // namespace ddlab
