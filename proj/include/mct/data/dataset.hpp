#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mct/data/idx.hpp"
#include "mct/types.hpp"

namespace mct::data {

inline constexpr std::size_t kDigitClasses = 10;

// One training set Gamma_i: flattened inputs in [0,1] and one-hot targets.
struct LabeledDataset {
    RowMatrix inputs;   // N x d
    RowMatrix targets;  // N x K, one-hot rows
    std::string name;
    double source_sigma = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
    std::size_t input_dim() const { return static_cast<std::size_t>(inputs.cols()); }
    std::size_t classes() const { return static_cast<std::size_t>(targets.cols()); }

    // argmax of each target row
    std::vector<std::uint8_t> labels() const;
};

struct SplitSpec {
    std::size_t parts = 3;
    std::uint64_t seed = 0;
    std::vector<double> sigmas{0.0, 0.1, 0.2};
};

// pixels / 255, one-hot targets. Throws DataError on a label >= classes.
LabeledDataset normalize(const RawDataset& raw, std::size_t classes = kDigitClasses);

LabeledDataset from_labels(RowMatrix inputs, std::span<const std::uint8_t> labels,
                           std::size_t classes, std::string name);

LabeledDataset take_rows(const LabeledDataset& data, std::span<const std::size_t> rows,
                         std::string name);

// Seeded permutation of the rows, then contiguous parts; the first N % M parts
// receive one extra row. Only spec.parts and spec.seed are used.
std::vector<LabeledDataset> split(const LabeledDataset& data, const SplitSpec& spec);

// x + Normal(0, sigma^2) per entry, clamped to [0,1]. Entries are visited in
// row-major order, so the output is a pure function of (data, sigma, seed).
LabeledDataset add_gaussian_noise(const LabeledDataset& data, double sigma, std::uint64_t seed);

// split() followed by noise on each part with sigma spec.sigmas[i] and a
// per-part stream derived from spec.seed. Parts are named gamma1..gammaM.
std::vector<LabeledDataset> make_subsets(const LabeledDataset& data, const SplitSpec& spec);

// Concatenate rows of several datasets (same d and K).
LabeledDataset concat(std::span<const LabeledDataset> parts, std::string name);

void save_dataset(const std::filesystem::path& dir, const LabeledDataset& data);
LabeledDataset load_dataset(const std::filesystem::path& dir, const std::string& name,
                            double source_sigma = 0.0);

}  // namespace mct::data
