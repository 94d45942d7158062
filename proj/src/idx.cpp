#include "mct/data/idx.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mct/error.hpp"

namespace mct::data {
namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
    if (bytes.size() < offset + 4) throw IoError("truncated header in " + path.string());
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void append_be32(std::vector<std::uint8_t>& bytes, std::uint32_t v) {
    bytes.push_back(static_cast<std::uint8_t>(v >> 24));
    bytes.push_back(static_cast<std::uint8_t>(v >> 16));
    bytes.push_back(static_cast<std::uint8_t>(v >> 8));
    bytes.push_back(static_cast<std::uint8_t>(v));
}

void check_magic(std::uint32_t found, std::uint32_t expected, const std::filesystem::path& path) {
    if (found != expected) {
        throw FormatError(path.string() + ": magic number " + std::to_string(found) +
                          ", expected " + std::to_string(expected));
    }
}

void require_payload(const std::vector<std::uint8_t>& bytes, std::size_t header,
                     std::size_t payload, const std::filesystem::path& path) {
    if (bytes.size() < header + payload) {
        throw IoError(path.string() + ": truncated payload (" +
                      std::to_string(bytes.size() - header) + " of " + std::to_string(payload) +
                      " bytes)");
    }
}

}  // namespace

RawDataset load_idx(const std::filesystem::path& images_path,
                    const std::filesystem::path& labels_path) {
    const auto image_bytes = read_file(images_path);
    const auto label_bytes = read_file(labels_path);

    check_magic(read_be32(image_bytes, 0, images_path), kImageMagic, images_path);
    check_magic(read_be32(label_bytes, 0, labels_path), kLabelMagic, labels_path);

    RawDataset raw;
    raw.count = read_be32(image_bytes, 4, images_path);
    raw.rows = read_be32(image_bytes, 8, images_path);
    raw.cols = read_be32(image_bytes, 12, images_path);
    const std::size_t label_count = read_be32(label_bytes, 4, labels_path);
    if (label_count != raw.count) {
        throw ConsistencyError(images_path.string() + " holds " + std::to_string(raw.count) +
                               " images but " + labels_path.string() + " holds " +
                               std::to_string(label_count) + " labels");
    }

    const std::size_t n_pixels = raw.count * raw.rows * raw.cols;
    require_payload(image_bytes, 16, n_pixels, images_path);
    require_payload(label_bytes, 8, raw.count, labels_path);
    raw.pixels.assign(image_bytes.begin() + 16, image_bytes.begin() + 16 + static_cast<std::ptrdiff_t>(n_pixels));
    raw.labels.assign(label_bytes.begin() + 8, label_bytes.begin() + 8 + static_cast<std::ptrdiff_t>(raw.count));
    return raw;
}

void save_idx(const RawDataset& raw, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path) {
    std::vector<std::uint8_t> images;
    images.reserve(16 + raw.pixels.size());
    append_be32(images, kImageMagic);
    append_be32(images, static_cast<std::uint32_t>(raw.count));
    append_be32(images, static_cast<std::uint32_t>(raw.rows));
    append_be32(images, static_cast<std::uint32_t>(raw.cols));
    images.insert(images.end(), raw.pixels.begin(), raw.pixels.end());
    write_file(images_path, images);
    write_label_idx(labels_path, raw.labels);
}

RawDataset center_crop(const RawDataset& raw, std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0 || rows > raw.rows || cols > raw.cols) {
        throw ArgumentError("center_crop: cannot crop " + std::to_string(raw.rows) + "x" +
                            std::to_string(raw.cols) + " to " + std::to_string(rows) + "x" +
                            std::to_string(cols));
    }
    const std::size_t top = (raw.rows - rows) / 2;
    const std::size_t left = (raw.cols - cols) / 2;
    RawDataset out;
    out.count = raw.count;
    out.rows = rows;
    out.cols = cols;
    out.labels = raw.labels;
    out.pixels.reserve(raw.count * rows * cols);
    for (std::size_t n = 0; n < raw.count; ++n) {
        const auto* image = raw.pixels.data() + n * raw.pixels_per_image();
        for (std::size_t r = top; r < top + rows; ++r) {
            const auto* line = image + r * raw.cols + left;
            out.pixels.insert(out.pixels.end(), line, line + cols);
        }
    }
    return out;
}

void write_matrix_idx(const std::filesystem::path& path, const RowMatrix& m) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(12 + 8 * static_cast<std::size_t>(m.size()));
    append_be32(bytes, kMatrixMagic);
    append_be32(bytes, static_cast<std::uint32_t>(m.rows()));
    append_be32(bytes, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(m.data()[i]);
        for (int shift = 56; shift >= 0; shift -= 8)
            bytes.push_back(static_cast<std::uint8_t>(bits >> shift));
    }
    write_file(path, bytes);
}

RowMatrix read_matrix_idx(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    check_magic(read_be32(bytes, 0, path), kMatrixMagic, path);
    const std::size_t rows = read_be32(bytes, 4, path);
    const std::size_t cols = read_be32(bytes, 8, path);
    require_payload(bytes, 12, 8 * rows * cols, path);
    RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    const std::uint8_t* p = bytes.data() + 12;
    for (Eigen::Index i = 0; i < m.size(); ++i, p += 8) {
        std::uint64_t bits = 0;
        for (int k = 0; k < 8; ++k) bits = (bits << 8) | p[k];
        m.data()[i] = std::bit_cast<double>(bits);
    }
    return m;
}

void write_label_idx(const std::filesystem::path& path, std::span<const std::uint8_t> labels) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(8 + labels.size());
    append_be32(bytes, kLabelMagic);
    append_be32(bytes, static_cast<std::uint32_t>(labels.size()));
    bytes.insert(bytes.end(), labels.begin(), labels.end());
    write_file(path, bytes);
}

std::vector<std::uint8_t> read_label_idx(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    check_magic(read_be32(bytes, 0, path), kLabelMagic, path);
    const std::size_t count = read_be32(bytes, 4, path);
    require_payload(bytes, 8, count, path);
    return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto byte : read_file(path)) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace mct::data
