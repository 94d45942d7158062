#include "mct/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <tuple>

#include "mct/rng.hpp"
#include "mct/text.hpp"

namespace mct::nn {
namespace {

using Matrix = Network::Matrix;

bool fused_output(const Network& net, dfe::Metric metric) {
    const auto& sc = net.shortcut();
    const bool post_into_last =
        sc && sc->to + 1 == net.layers().size() && sc->mode == ShortcutMode::post_activation;
    return metric == dfe::Metric::binary_cross_entropy && net.layers().back().activation == Activation::sigmoid &&
           !post_into_last;
}

constexpr std::size_t kEvalChunk = 4096;

}  // namespace

LossAndLayerGradient scalarized_loss_gradient(const Network& net, std::span<const Batch> batches, dfe::Metric metric,
                                              const dfe::ScalarizationWeights& weights) {
    if (batches.size() != weights.size())
        throw ArgumentError("loss_and_grad: " + std::to_string(batches.size()) + " batches for " +
                            std::to_string(weights.size()) + " weights");
    LossAndLayerGradient result{0.0, net.zero_gradient()};
    const bool fused = fused_output(net, metric);
    for (std::size_t i = 0; i < batches.size(); ++i) {
        const auto& batch = batches[i];
        if (batch.inputs.rows() != batch.targets.rows())
            throw ArgumentError("loss_and_grad: batch " + std::to_string(i) + " has mismatched inputs and targets");
        if (batch.inputs.rows() == 0) continue;
        if (batch.targets.cols() != net.output_dim())
            throw ArgumentError("loss_and_grad: targets have " + std::to_string(batch.targets.cols()) +
                                " columns, network gives " + std::to_string(net.output_dim()));
        const Matrix x = batch.inputs.transpose();
        const Matrix y = dfe::labels_for(metric, batch.targets).transpose();
        const auto trace = net.trace(x);
        const Matrix& p = trace.output.back();
        const double coeff = weights[i] / static_cast<double>(x.cols());

        double sum = 0.0;
        for (Eigen::Index j = 0; j < p.cols(); ++j) sum += dfe::per_sample_loss(metric, p.col(j), y.col(j));
        result.loss += coeff * sum;

        Matrix d_output(p.rows(), p.cols());
        if (fused) {
            d_output = coeff * (p - y);
        } else {
            for (Eigen::Index j = 0; j < p.cols(); ++j)
                dfe::per_sample_loss_gradient(metric, p.col(j), y.col(j), d_output.col(j));
            d_output *= coeff;
        }
        net.backward(x, trace, std::move(d_output), result.gradient, fused);
    }
    return result;
}

LossAndGradient loss_and_grad(const Network& net, std::span<const Batch> batches, dfe::Metric metric,
                              const dfe::ScalarizationWeights& weights) {
    auto r = scalarized_loss_gradient(net, batches, metric, weights);
    return {r.loss, r.gradient.flatten()};
}

std::pair<double, std::vector<double>> evaluate_loss(const Network& net, std::span<const data::LabeledDataset> datasets,
                                                     dfe::Metric metric, const dfe::ScalarizationWeights& weights) {
    std::vector<dfe::DfeVector> vectors;
    std::vector<double> means;
    for (const auto& d : datasets) {
        VectorXd values(static_cast<Eigen::Index>(d.size()));
        for (Eigen::Index at = 0; at < values.size(); at += kEvalChunk) {
            const Eigen::Index n = std::min<Eigen::Index>(kEvalChunk, values.size() - at);
            const RowMatrix out = net.forward(d.inputs.middleRows(at, n));
            const RowMatrix y = dfe::labels_for(metric, d.targets.middleRows(at, n));
            values.segment(at, n) = dfe::dfe_vector(out, y, metric).values;
        }
        vectors.push_back({std::move(values), d.name});
        means.push_back(vectors.back().mean());
    }
    return {dfe::scalarize(vectors, weights), std::move(means)};
}

TrainResult sgd_train(Network net, const TrainConfig& config) {
    const auto& datasets = config.datasets;
    if (datasets.empty()) throw ArgumentError("sgd_train: no datasets");
    if (datasets.size() != config.weights.size())
        throw ArgumentError("sgd_train: " + std::to_string(datasets.size()) + " datasets for " +
                            std::to_string(config.weights.size()) + " weights");
    if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate))
        throw ArgumentError("sgd_train: learning rate must be finite and nonnegative");
    if (config.epochs == 0 || config.batch_size == 0) throw ArgumentError("sgd_train: epochs and batch size must be >= 1");
    std::size_t largest = 0;
    for (const auto& d : datasets) {
        if (d.size() == 0) throw ArgumentError("sgd_train: dataset " + d.name + " is empty");
        if (static_cast<Eigen::Index>(d.input_dim()) != net.input_dim() ||
            static_cast<Eigen::Index>(d.classes()) != net.output_dim())
            throw ArgumentError("sgd_train: dataset " + d.name + " does not fit the network dimensions");
        largest = std::max(largest, d.size());
    }

    TrainHistory history;
    std::tie(history.initial_loss, history.initial_dfe) = evaluate_loss(net, datasets, config.metric, config.weights);

    Xoshiro256 rng(derive_seed(config.seed, 1));
    std::vector<std::vector<std::size_t>> order(datasets.size());
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        order[i].resize(datasets[i].size());
        std::iota(order[i].begin(), order[i].end(), std::size_t{0});
    }
    const std::size_t steps = (largest + config.batch_size - 1) / config.batch_size;
    std::vector<Batch> batches(datasets.size());

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (auto& o : order) shuffle(std::span<std::size_t>(o), rng);
        for (std::size_t k = 0; k < steps; ++k) {
            for (std::size_t i = 0; i < datasets.size(); ++i) {
                const std::size_t s = datasets[i].size();
                const std::size_t lo = k * s / steps;
                const std::size_t hi = (k + 1) * s / steps;
                auto& b = batches[i];
                b.inputs.resize(static_cast<Eigen::Index>(hi - lo), datasets[i].inputs.cols());
                b.targets.resize(static_cast<Eigen::Index>(hi - lo), datasets[i].targets.cols());
                for (std::size_t r = lo; r < hi; ++r) {
                    b.inputs.row(static_cast<Eigen::Index>(r - lo)) = datasets[i].inputs.row(static_cast<Eigen::Index>(order[i][r]));
                    b.targets.row(static_cast<Eigen::Index>(r - lo)) = datasets[i].targets.row(static_cast<Eigen::Index>(order[i][r]));
                }
            }
            auto step = scalarized_loss_gradient(net, batches, config.metric, config.weights);
            if (!std::isfinite(step.loss))
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                                    std::to_string(k + 1));
            net.apply_update(step.gradient, config.learning_rate, config.box);
        }
        auto [loss, means] = evaluate_loss(net, datasets, config.metric, config.weights);
        if (!std::isfinite(loss))
            throw TrainingError("non-finite loss after epoch " + std::to_string(epoch + 1));
        history.loss.push_back(loss);
        history.dataset_dfe.push_back(std::move(means));
    }
    for (const auto& d : datasets) history.train_accuracy.push_back(accuracy(net, d));
    return {std::move(net), std::move(history)};
}

std::vector<std::size_t> argmax_rows(const RowMatrix& outputs) {
    std::vector<std::size_t> out(static_cast<std::size_t>(outputs.rows()), 0);
    for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < outputs.cols(); ++k)
            if (outputs(i, k) > outputs(i, best)) best = k;
        out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    }
    return out;
}

double accuracy(const RowMatrix& outputs, const RowMatrix& targets) {
    if (outputs.rows() == 0) throw ArgumentError("accuracy: empty dataset");
    if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols())
        throw ArgumentError("accuracy: outputs and targets differ in shape");
    const auto predicted = argmax_rows(outputs);
    const auto expected = argmax_rows(targets);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == expected[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double accuracy(const Network& net, const data::LabeledDataset& data) {
    if (data.size() == 0) throw ArgumentError("accuracy: empty dataset " + data.name);
    std::size_t hits = 0;
    for (Eigen::Index at = 0; at < data.inputs.rows(); at += kEvalChunk) {
        const Eigen::Index n = std::min<Eigen::Index>(kEvalChunk, data.inputs.rows() - at);
        const RowMatrix out = net.forward(data.inputs.middleRows(at, n));
        const auto predicted = argmax_rows(out);
        const auto expected = argmax_rows(data.targets.middleRows(at, n));
        for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == expected[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

void write_history_csv(std::ostream& out, const TrainHistory& history, std::span<const std::string> dataset_names) {
    out << "epoch,loss";
    for (const auto& name : dataset_names) out << ",dfe_" << name;
    out << '\n';
    out << "0," << format_double(history.initial_loss);
    for (const double v : history.initial_dfe) out << ',' << format_double(v);
    out << '\n';
    for (std::size_t e = 0; e < history.loss.size(); ++e) {
        out << e + 1 << ',' << format_double(history.loss[e]);
        for (const double v : history.dataset_dfe[e]) out << ',' << format_double(v);
        out << '\n';
    }
}

}  // namespace mct::nn
