#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mct/data/dataset.hpp"
#include "mct/dfe/dfe.hpp"
#include "mct/nn/network.hpp"

namespace mct::nn {

// One minibatch drawn from one dataset Gamma_i; targets are one-hot rows.
struct Batch {
    RowMatrix inputs;
    RowMatrix targets;
};

struct LossAndGradient {
    double loss = 0.0;
    VectorXd gradient;  // d loss / d lambda, parameter order of Network::parameters()
};

struct LossAndLayerGradient {
    double loss = 0.0;
    NetworkGradient<double> gradient;
};

// loss = sum_i beta_i * mean_j d^Y(f(x_j), y_j) over batch i, and its exact
// gradient. For the cross-entropy metric on a sigmoid output layer the output
// delta is fused to (p - y), the derivative of the unclipped loss. Batches
// with no rows contribute nothing.
LossAndLayerGradient scalarized_loss_gradient(const Network& net, std::span<const Batch> batches, dfe::Metric metric,
                                              const dfe::ScalarizationWeights& weights);

LossAndGradient loss_and_grad(const Network& net, std::span<const Batch> batches, dfe::Metric metric,
                              const dfe::ScalarizationWeights& weights);

struct TrainConfig {
    std::span<const data::LabeledDataset> datasets;
    dfe::Metric metric = dfe::Metric::binary_cross_entropy;
    dfe::ScalarizationWeights weights = dfe::ScalarizationWeights::uniform(3);
    std::size_t epochs = 30;
    std::size_t batch_size = 10;  // rows drawn from each dataset per step
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
    std::optional<double> box;  // project lambda onto [-box, box] after each step
};

struct TrainHistory {
    double initial_loss = 0.0;
    std::vector<double> initial_dfe;
    std::vector<double> loss;                       // full-data scalarized loss after each epoch
    std::vector<std::vector<double>> dataset_dfe;   // [epoch][dataset] mean DFE
    std::vector<double> train_accuracy;             // per dataset, after the last epoch
};

struct TrainResult {
    Network network;
    TrainHistory history;
};

// Seeded SGD. Each epoch shuffles every Gamma_i, then walks ceil(max_i s_i / batch_size)
// steps; step k takes the k-th aligned fraction [k s_i / steps, (k+1) s_i / steps)
// of every dataset, so the weights enter only through the loss.
TrainResult sgd_train(Network net, const TrainConfig& config);

// Full-data scalarized loss and the per-dataset mean DFE.
std::pair<double, std::vector<double>> evaluate_loss(const Network& net, std::span<const data::LabeledDataset> datasets,
                                                     dfe::Metric metric, const dfe::ScalarizationWeights& weights);

// Index of the largest entry of each row; ties go to the lowest index.
std::vector<std::size_t> argmax_rows(const RowMatrix& outputs);

// Fraction of rows whose output argmax equals the target argmax.
double accuracy(const RowMatrix& outputs, const RowMatrix& targets);
double accuracy(const Network& net, const data::LabeledDataset& data);

// CSV: epoch,loss,dfe_<name>... (epoch 0 is the initial network)
void write_history_csv(std::ostream& out, const TrainHistory& history, std::span<const std::string> dataset_names);

// Plain-text checkpoint:
//   mct-network 1
//   layers <L>
//   shortcut none | shortcut <from> <to> <pre|post>
//   then per layer: "layer <in> <out> <activation>", <out> lines of <in>
//   weights (row-major), one line of <out> biases.
// Values use the shortest round-trip decimal form, so save/load is exact.
void save_checkpoint(std::ostream& out, const Network& net);
void save_checkpoint(const std::filesystem::path& path, const Network& net);
Network load_checkpoint(std::istream& in);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace mct::nn
