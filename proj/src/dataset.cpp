#include "mct/data/dataset.hpp"

#include <algorithm>
#include <numeric>

#include "mct/error.hpp"
#include "mct/rng.hpp"

namespace mct::data {

std::vector<std::uint8_t> LabeledDataset::labels() const {
    std::vector<std::uint8_t> out(size());
    for (Eigen::Index i = 0; i < targets.rows(); ++i) {
        Eigen::Index k = 0;
        targets.row(i).maxCoeff(&k);
        out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(k);
    }
    return out;
}

LabeledDataset from_labels(RowMatrix inputs, std::span<const std::uint8_t> labels,
                           std::size_t classes, std::string name) {
    if (static_cast<std::size_t>(inputs.rows()) != labels.size())
        throw ArgumentError("from_labels: row count differs from label count");
    LabeledDataset out;
    out.inputs = std::move(inputs);
    out.targets = RowMatrix::Zero(static_cast<Eigen::Index>(labels.size()),
                                  static_cast<Eigen::Index>(classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= classes) {
            throw DataError("label " + std::to_string(labels[i]) + " at sample " +
                            std::to_string(i) + " is outside 0.." + std::to_string(classes - 1));
        }
        out.targets(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    }
    out.name = std::move(name);
    return out;
}

LabeledDataset normalize(const RawDataset& raw, std::size_t classes) {
    if (raw.labels.size() != raw.count || raw.pixels.size() != raw.count * raw.pixels_per_image())
        throw ConsistencyError("normalize: raw dataset sizes disagree");
    const auto d = static_cast<Eigen::Index>(raw.pixels_per_image());
    RowMatrix inputs(static_cast<Eigen::Index>(raw.count), d);
    std::transform(raw.pixels.begin(), raw.pixels.end(), inputs.data(),
                   [](std::uint8_t p) { return static_cast<double>(p) / 255.0; });
    return from_labels(std::move(inputs), raw.labels, classes, "raw");
}

LabeledDataset take_rows(const LabeledDataset& data, std::span<const std::size_t> rows,
                         std::string name) {
    LabeledDataset out;
    out.inputs.resize(static_cast<Eigen::Index>(rows.size()), data.inputs.cols());
    out.targets.resize(static_cast<Eigen::Index>(rows.size()), data.targets.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= data.size()) throw ArgumentError("take_rows: row index out of range");
        out.inputs.row(static_cast<Eigen::Index>(i)) = data.inputs.row(static_cast<Eigen::Index>(rows[i]));
        out.targets.row(static_cast<Eigen::Index>(i)) = data.targets.row(static_cast<Eigen::Index>(rows[i]));
    }
    out.name = std::move(name);
    out.source_sigma = data.source_sigma;
    return out;
}

std::vector<LabeledDataset> split(const LabeledDataset& data, const SplitSpec& spec) {
    const std::size_t n = data.size();
    const std::size_t m = spec.parts;
    if (m == 0) throw ArgumentError("split: need at least one part");
    if (m > n) {
        throw ArgumentError("split: " + std::to_string(m) + " parts requested from " +
                            std::to_string(n) + " samples");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Xoshiro256 rng(spec.seed);
    shuffle(std::span<std::size_t>(order), rng);

    std::vector<LabeledDataset> parts;
    parts.reserve(m);
    std::size_t begin = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t len = n / m + (i < n % m ? 1 : 0);
        parts.push_back(take_rows(data, std::span(order).subspan(begin, len),
                                  data.name + "/part" + std::to_string(i + 1)));
        begin += len;
    }
    return parts;
}

LabeledDataset add_gaussian_noise(const LabeledDataset& data, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw ArgumentError("add_gaussian_noise: sigma must be >= 0");
    LabeledDataset out = data;
    out.source_sigma = sigma;
    if (sigma == 0.0) return out;
    Xoshiro256 rng(seed);
    double* x = out.inputs.data();
    for (Eigen::Index i = 0; i < out.inputs.size(); ++i)
        x[i] = std::clamp(x[i] + sigma * rng.normal(), 0.0, 1.0);
    return out;
}

std::vector<LabeledDataset> make_subsets(const LabeledDataset& data, const SplitSpec& spec) {
    if (spec.sigmas.size() != spec.parts)
        throw ArgumentError("make_subsets: need one sigma per part");
    auto parts = split(data, spec);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        parts[i] = add_gaussian_noise(parts[i], spec.sigmas[i], derive_seed(spec.seed, 100 + i));
        parts[i].name = "gamma" + std::to_string(i + 1);
    }
    return parts;
}

LabeledDataset concat(std::span<const LabeledDataset> parts, std::string name) {
    if (parts.empty()) throw ArgumentError("concat: no parts");
    Eigen::Index rows = 0;
    for (const auto& p : parts) {
        if (p.inputs.cols() != parts[0].inputs.cols() || p.targets.cols() != parts[0].targets.cols())
            throw ArgumentError("concat: incompatible dimensions");
        rows += p.inputs.rows();
    }
    LabeledDataset out;
    out.inputs.resize(rows, parts[0].inputs.cols());
    out.targets.resize(rows, parts[0].targets.cols());
    Eigen::Index at = 0;
    for (const auto& p : parts) {
        out.inputs.middleRows(at, p.inputs.rows()) = p.inputs;
        out.targets.middleRows(at, p.targets.rows()) = p.targets;
        at += p.inputs.rows();
    }
    out.name = std::move(name);
    return out;
}

void save_dataset(const std::filesystem::path& dir, const LabeledDataset& data) {
    std::filesystem::create_directories(dir);
    write_matrix_idx(dir / (data.name + "-inputs.idx"), data.inputs);
    const auto labels = data.labels();
    write_label_idx(dir / (data.name + "-labels.idx"), labels);
}

LabeledDataset load_dataset(const std::filesystem::path& dir, const std::string& name,
                            double source_sigma) {
    auto inputs = read_matrix_idx(dir / (name + "-inputs.idx"));
    const auto labels = read_label_idx(dir / (name + "-labels.idx"));
    if (static_cast<std::size_t>(inputs.rows()) != labels.size())
        throw ConsistencyError("prepared dataset " + name + ": input and label counts differ");
    auto out = from_labels(std::move(inputs), labels, kDigitClasses, name);
    out.source_sigma = source_sigma;
    return out;
}

}  // namespace mct::data
