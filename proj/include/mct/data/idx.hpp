#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mct/types.hpp"

namespace mct::data {

inline constexpr std::uint32_t kImageMagic = 2051;   // 0x00000803: ubyte, 3 dims
inline constexpr std::uint32_t kLabelMagic = 2049;   // 0x00000801: ubyte, 1 dim
inline constexpr std::uint32_t kMatrixMagic = 3586;  // 0x00000E02: float64, 2 dims

// Pixels and labels exactly as stored in a pair of MNIST-style IDX files.
struct RawDataset {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major per image
    std::vector<std::uint8_t> labels;  // count

    std::size_t pixels_per_image() const { return rows * cols; }
};

// Reads an images file (magic 2051) and a labels file (magic 2049). Throws
// FormatError on a wrong magic, ConsistencyError when the counts disagree and
// IoError when either file is missing or shorter than its header promises.
RawDataset load_idx(const std::filesystem::path& images_path,
                    const std::filesystem::path& labels_path);

void save_idx(const RawDataset& raw, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path);

// Keeps the central rows x cols window of every image.
RawDataset center_crop(const RawDataset& raw, std::size_t rows, std::size_t cols);

// Big-endian float64 matrix in the IDX family (type code 0x0E). Used for
// prepared, already-noised datasets where byte quantization would lose the noise.
void write_matrix_idx(const std::filesystem::path& path, const RowMatrix& m);
RowMatrix read_matrix_idx(const std::filesystem::path& path);

void write_label_idx(const std::filesystem::path& path, std::span<const std::uint8_t> labels);
std::vector<std::uint8_t> read_label_idx(const std::filesystem::path& path);

// FNV-1a 64 over the file bytes.
std::uint64_t file_checksum(const std::filesystem::path& path);

}  // namespace mct::data
