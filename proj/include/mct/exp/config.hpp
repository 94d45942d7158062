#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mct/dfe/metric.hpp"
#include "mct/nn/network.hpp"

namespace mct::exp {

inline constexpr const char* kDataDirEnv = "MCT_DATA_DIR";

// Everything a prepare/train/sweep run needs. Loaded from TOML; command-line
// flags are applied afterwards and win.
struct ExperimentConfig {
    // [data]
    std::filesystem::path data_dir = "data";
    std::string images_file = "train-images-idx3-ubyte";
    std::string labels_file = "train-labels-idx1-ubyte";
    std::optional<std::size_t> sample_count;  // all samples when unset
    double validation_fraction = 0.2;
    bool crop20 = false;  // center-crop 28x28 digits to 20x20 (d = 400)

    // [split]
    std::size_t parts = 3;
    std::vector<double> sigmas{0.0, 0.1, 0.2};

    // [train]
    nn::Architecture arch = nn::Architecture::mlp;
    std::vector<std::size_t> hidden;  // empty: 25 for mlp, 64,64 for residual
    nn::ShortcutMode shortcut_mode = nn::ShortcutMode::pre_activation;
    dfe::Metric metric = dfe::Metric::binary_cross_entropy;
    std::size_t epochs = 30;
    std::size_t batch_size = 10;
    std::optional<double> learning_rate;  // 0.1 for mlp, 0.05 for residual

    // [sweep]
    std::vector<double> epsilons{0.001, 0.002, 0.003, 0.004, 0.005, 0.006, 0.007, 0.008, 0.009, 0.01};
    std::vector<std::uint64_t> seeds;  // empty: {seed}
    std::size_t threads = 1;

    std::uint64_t seed = 42;
    std::filesystem::path out_dir = "out";

    double effective_learning_rate() const {
        return learning_rate.value_or(arch == nn::Architecture::mlp ? 0.1 : 0.05);
    }
    std::vector<std::uint64_t> effective_seeds() const { return seeds.empty() ? std::vector{seed} : seeds; }
    std::vector<std::size_t> layer_dims(std::size_t input_dim, std::size_t classes) const;

    // Throws ArgumentError on out-of-range values (validation fraction, sigma
    // count, epsilons that give negative weights, ...).
    void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::string_view toml_text, const std::string& source = "config");

// TOML rendering of a config (round-trips through parse_config).
std::string to_toml(const ExperimentConfig& config);

}  // namespace mct::exp
