#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mct/data/dataset.hpp"
#include "mct/exp/config.hpp"
#include "mct/exp/suites.hpp"

namespace mct::exp {

// On-disk layout under config.out_dir:
//   prepared/manifest.json, prepared/<name>-inputs.idx, prepared/<name>-labels.idx
//   runs/eps_<epsilon>_seed_<seed>/{checkpoint.txt,history.csv,summary.json}
//   sweep.csv, sweep_detail.csv, sweep_summary.csv, timings.csv,
//   sweep_train.svg, sweep_val.svg, report.md, verify_<suite>.csv

struct PreparedData {
    std::vector<data::LabeledDataset> parts;  // gamma1..gammaM
    data::LabeledDataset validation;
};

// Loads the IDX pair, optionally crops, shuffles with the run seed, keeps
// sample_count rows, carves off the clean validation split, then splits the
// rest into M parts and noises part i with sigma_i. Writes everything plus a
// manifest with seeds, sizes and checksums.
PreparedData cmd_prepare(const ExperimentConfig& config);

// Reads prepared data back, checking every file against the manifest.
PreparedData load_prepared(const std::filesystem::path& out_dir);

struct RunResult {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    std::string arch;
    std::vector<double> part_accuracy;
    double train_accuracy = 0.0;  // pooled over all parts
    double validation_accuracy = 0.0;
    double final_loss = 0.0;
    double seconds = 0.0;
    bool ok = true;
    std::string error;
};

// One training run with epsilon_weights(M, epsilon). Throws ArgumentError on
// an epsilon that makes a weight negative.
RunResult cmd_train(const ExperimentConfig& config, const PreparedData& data, double epsilon, std::uint64_t seed);
RunResult cmd_train(const ExperimentConfig& config, double epsilon);

struct SweepResult {
    std::vector<RunResult> rows;  // sorted by (epsilon, seed)
};

// epsilon = 0 plus every grid value, for every seed. Cells run on
// config.threads workers; failures are recorded in their row.
SweepResult cmd_sweep(const ExperimentConfig& config);

inline constexpr const char* kSweepHeader = "epsilon,seed,arch,train_acc,val_acc,final_loss";

struct ReportRow {
    double epsilon = 0.0;
    double train = 0.0;
    double validation = 0.0;
    std::size_t seeds = 0;
};

struct Report {
    ReportRow benchmark;
    ReportRow best;  // highest mean training accuracy, ties toward smaller epsilon
    std::string table;
};

// Table of training/validation accuracy for epsilon = 0 and the best-training
// epsilon, averaged over seeds. Throws DataError without a benchmark row.
Report cmd_report(const std::filesystem::path& sweep_csv);

// Runs a verification suite and writes verify_<suite>.csv into out_dir.
SuiteResult cmd_verify(std::string_view suite, std::size_t trials, std::uint64_t seed,
                       const std::filesystem::path& out_dir);

}  // namespace mct::exp
