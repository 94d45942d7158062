#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "mct/data/dataset.hpp"
#include "mct/data/idx.hpp"
#include "mct/error.hpp"
#include "test_util.hpp"

using namespace mct;
using namespace mct::data;
namespace fs = std::filesystem;

namespace {

RawDataset tiny_raw(std::size_t count) {
    RawDataset raw;
    raw.count = count;
    raw.rows = 2;
    raw.cols = 3;
    for (std::size_t i = 0; i < count * 6; ++i) raw.pixels.push_back(static_cast<std::uint8_t>((i * 37) % 256));
    for (std::size_t i = 0; i < count; ++i) raw.labels.push_back(static_cast<std::uint8_t>(i % 10));
    return raw;
}

void write_be32(std::ofstream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

LabeledDataset constant_dataset(std::size_t n, std::size_t d, double value) {
    RowMatrix x = RowMatrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d), value);
    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<std::uint8_t>(i % 10);
    return from_labels(std::move(x), labels, 10, "const");
}

}  // namespace

TEST_CASE("idx round trip keeps pixels and labels") {
    test::TempDir dir;
    const auto raw = tiny_raw(7);
    save_idx(raw, dir / "img", dir / "lab");
    const auto back = load_idx(dir / "img", dir / "lab");
    CHECK(back.count == 7);
    CHECK(back.rows == 2);
    CHECK(back.cols == 3);
    CHECK(back.pixels == raw.pixels);
    CHECK(back.labels == raw.labels);
}

TEST_CASE("idx header bytes are big-endian 2051 / 2049") {
    test::TempDir dir;
    save_idx(tiny_raw(3), dir / "img", dir / "lab");
    std::ifstream img(dir / "img", std::ios::binary);
    unsigned char h[8];
    img.read(reinterpret_cast<char*>(h), 8);
    CHECK(h[0] == 0x00);
    CHECK(h[1] == 0x00);
    CHECK(h[2] == 0x08);
    CHECK(h[3] == 0x03);
    CHECK(h[7] == 3);
    std::ifstream lab(dir / "lab", std::ios::binary);
    lab.read(reinterpret_cast<char*>(h), 4);
    CHECK(h[3] == 0x01);
}

TEST_CASE("load_idx rejects a label file passed as images, naming it") {
    test::TempDir dir;
    save_idx(tiny_raw(3), dir / "img", dir / "lab");
    try {
        load_idx(dir / "lab", dir / "lab");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find((dir / "lab").string()) != std::string::npos);
    }
}

TEST_CASE("load_idx count mismatch and truncation") {
    test::TempDir dir;
    save_idx(tiny_raw(4), dir / "img4", dir / "lab4");
    save_idx(tiny_raw(3), dir / "img3", dir / "lab3");
    CHECK_THROWS_AS(load_idx(dir / "img4", dir / "lab3"), ConsistencyError);

    {
        std::ofstream out(dir / "short", std::ios::binary);
        write_be32(out, kImageMagic);
        write_be32(out, 5);
        write_be32(out, 28);
        write_be32(out, 28);
        out.write("abc", 3);
    }
    save_idx(tiny_raw(5), dir / "img5", dir / "lab5");
    CHECK_THROWS_AS(load_idx(dir / "short", dir / "lab5"), IoError);
    CHECK_THROWS_AS(load_idx(dir / "missing", dir / "lab4"), IoError);
}

TEST_CASE("center crop keeps the middle window") {
    RawDataset raw;
    raw.count = 1;
    raw.rows = 4;
    raw.cols = 4;
    for (int i = 0; i < 16; ++i) raw.pixels.push_back(static_cast<std::uint8_t>(i));
    raw.labels = {1};
    const auto c = center_crop(raw, 2, 2);
    CHECK(c.rows == 2);
    CHECK(c.pixels == std::vector<std::uint8_t>{5, 6, 9, 10});
    CHECK_THROWS_AS(center_crop(raw, 5, 2), ArgumentError);
}

TEST_CASE("float64 matrix idx is exact") {
    test::TempDir dir;
    RowMatrix m(3, 2);
    m << 0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0, 0.7071067811865476;
    write_matrix_idx(dir / "m.idx", m);
    CHECK(read_matrix_idx(dir / "m.idx") == m);
    CHECK(file_checksum(dir / "m.idx") == file_checksum(dir / "m.idx"));
}

TEST_CASE("normalize scales pixels and one-hot encodes") {
    RawDataset raw;
    raw.count = 2;
    raw.rows = 1;
    raw.cols = 2;
    raw.pixels = {255, 0, 51, 102};
    raw.labels = {3, 0};
    const auto d = normalize(raw);
    CHECK(d.inputs(0, 0) == 1.0);
    CHECK(d.inputs(0, 1) == 0.0);
    CHECK(d.inputs(1, 0) == doctest::Approx(0.2));
    RowMatrix expected = RowMatrix::Zero(1, 10);
    expected(0, 3) = 1.0;
    CHECK(d.targets.row(0) == expected.row(0));
    CHECK(d.labels() == std::vector<std::uint8_t>{3, 0});

    raw.labels = {3, 10};
    CHECK_THROWS_AS(normalize(raw), DataError);
}

TEST_CASE("split sizes follow the remainder rule") {
    const auto d = constant_dataset(10, 2, 0.5);
    const auto parts = split(d, {3, 1, {0, 0, 0}});
    REQUIRE(parts.size() == 3);
    CHECK(parts[0].size() == 4);
    CHECK(parts[1].size() == 3);
    CHECK(parts[2].size() == 3);

    const auto big = constant_dataset(60000, 1, 0.5);
    for (const auto& p : split(big, {3, 9, {0, 0, 0}})) CHECK(p.size() == 20000);

    CHECK_THROWS_AS(split(d, {11, 1, {}}), ArgumentError);
    CHECK_THROWS_AS(split(d, {0, 1, {}}), ArgumentError);
}

TEST_CASE("split with M = 1 is a permutation") {
    RowMatrix x(20, 1);
    for (int i = 0; i < 20; ++i) x(i, 0) = i;
    std::vector<std::uint8_t> labels(20, 0);
    const auto d = from_labels(x, labels, 10, "seq");
    const auto parts = split(d, {1, 5, {0}});
    REQUIRE(parts.size() == 1);
    std::multiset<double> a(x.data(), x.data() + 20);
    std::multiset<double> b(parts[0].inputs.data(), parts[0].inputs.data() + 20);
    CHECK(a == b);
}

TEST_CASE("split partitions the rows") {
    RowMatrix x(31, 1);
    for (int i = 0; i < 31; ++i) x(i, 0) = i;
    std::vector<std::uint8_t> labels(31);
    for (int i = 0; i < 31; ++i) labels[i] = static_cast<std::uint8_t>(i % 10);
    const auto d = from_labels(x, labels, 10, "seq");
    std::set<double> seen;
    for (const auto& p : split(d, {4, 77, {0, 0, 0, 0}})) {
        for (Eigen::Index i = 0; i < p.inputs.rows(); ++i) {
            seen.insert(p.inputs(i, 0));
            // labels travel with their rows
            CHECK(p.labels()[static_cast<std::size_t>(i)] == static_cast<int>(p.inputs(i, 0)) % 10);
        }
    }
    CHECK(seen.size() == 31);
}

TEST_CASE("gaussian noise contract") {
    const auto d = constant_dataset(1000, 1, 0.5);
    CHECK(add_gaussian_noise(d, 0.0, 3).inputs == d.inputs);
    const auto a = add_gaussian_noise(d, 0.1, 3);
    const auto b = add_gaussian_noise(d, 0.1, 3);
    CHECK(a.inputs == b.inputs);
    CHECK(a.targets == d.targets);
    CHECK_THROWS_AS(add_gaussian_noise(d, -0.1, 3), ArgumentError);

    // Clamping at [0,1] is 5 sigma away from 0.5, so it does not touch these draws.
    const Eigen::ArrayXd diff = (a.inputs - d.inputs).col(0).array();
    const double mean = diff.mean();
    const double sd = std::sqrt((diff - mean).square().sum() / static_cast<double>(diff.size() - 1));
    CHECK(std::abs(mean) <= 0.01);
    CHECK(std::abs(sd - 0.1) <= 0.01);
}

TEST_CASE("noise is clamped to [0,1]") {
    const auto d = constant_dataset(200, 5, 0.95);
    const auto n = add_gaussian_noise(d, 2.0, 1);
    CHECK(n.inputs.minCoeff() >= 0.0);
    CHECK(n.inputs.maxCoeff() <= 1.0);
}

TEST_CASE("make_subsets names parts and records sigma") {
    const auto d = constant_dataset(30, 3, 0.5);
    const auto parts = make_subsets(d, {3, 11, {0.0, 0.1, 0.2}});
    REQUIRE(parts.size() == 3);
    CHECK(parts[0].name == "gamma1");
    CHECK(parts[2].name == "gamma3");
    CHECK(parts[0].source_sigma == 0.0);
    CHECK(parts[1].source_sigma == 0.1);
    CHECK(parts[2].source_sigma == 0.2);
    CHECK(parts[0].inputs == RowMatrix::Constant(10, 3, 0.5));
    CHECK(parts[1].inputs != RowMatrix::Constant(10, 3, 0.5));
    CHECK_THROWS_AS(make_subsets(d, {3, 11, {0.0, 0.1}}), ArgumentError);
}

TEST_CASE("dataset save/load round trip") {
    test::TempDir dir;
    const auto d = add_gaussian_noise(constant_dataset(12, 4, 0.3), 0.05, 2);
    save_dataset(dir.path(), d);
    const auto back = load_dataset(dir.path(), d.name, 0.05);
    CHECK(back.inputs == d.inputs);
    CHECK(back.targets == d.targets);
    CHECK(back.source_sigma == 0.05);
}
