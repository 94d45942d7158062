#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mct/dfe/dfe.hpp"
#include "mct/error.hpp"
#include "mct/rng.hpp"
#include "mct/types.hpp"

namespace mct::nn {

enum class Activation { sigmoid, relu, identity };

inline std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::sigmoid: return "sigmoid";
        case Activation::relu: return "relu";
        case Activation::identity: return "identity";
    }
    return "unknown";
}

inline Activation parse_activation(std::string_view s) {
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "relu") return Activation::relu;
    if (s == "identity") return Activation::identity;
    throw ArgumentError("unknown activation '" + std::string(s) + "'");
}

// Where the shortcut enters the target layer: added to its pre-activation
// (default, the "+" node feeds the target's activation) or to its output.
enum class ShortcutMode { pre_activation, post_activation };

// Identity mapping from the output of layer `from` into layer `to` (from < to).
struct Shortcut {
    std::size_t from = 0;
    std::size_t to = 1;
    ShortcutMode mode = ShortcutMode::pre_activation;
};

template <typename Scalar>
struct DenseLayer {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Matrix weights;  // out x in
    Vector bias;     // out
    Activation activation = Activation::sigmoid;

    Eigen::Index in() const { return weights.cols(); }
    Eigen::Index out() const { return weights.rows(); }
    Eigen::Index parameter_count() const { return weights.size() + bias.size(); }
};

template <typename Scalar>
Scalar sigmoid(Scalar z) {
    return Scalar(1) / (Scalar(1) + std::exp(-z));
}

template <typename Derived>
auto activate(Activation a, const Eigen::MatrixBase<Derived>& z) {
    using Scalar = typename Derived::Scalar;
    typename Derived::PlainObject out(z.rows(), z.cols());
    switch (a) {
        case Activation::sigmoid: out = z.unaryExpr([](Scalar v) { return sigmoid(v); }); break;
        case Activation::relu: out = z.cwiseMax(Scalar(0)); break;
        case Activation::identity: out = z; break;
    }
    return out;
}

// d act / d z given z and act(z).
template <typename DerivedZ, typename DerivedH>
auto activation_slope(Activation a, const Eigen::MatrixBase<DerivedZ>& z, const Eigen::MatrixBase<DerivedH>& h) {
    using Scalar = typename DerivedZ::Scalar;
    typename DerivedZ::PlainObject out(z.rows(), z.cols());
    switch (a) {
        case Activation::sigmoid: out = (h.array() * (Scalar(1) - h.array())).matrix(); break;
        case Activation::relu: out = (z.array() > Scalar(0)).template cast<Scalar>().matrix(); break;
        case Activation::identity: out.setOnes(); break;
    }
    return out;
}

// Parameter-shaped gradient, one (dW, db) pair per layer.
template <typename Scalar>
struct NetworkGradient {
    std::vector<typename DenseLayer<Scalar>::Matrix> weights;
    std::vector<typename DenseLayer<Scalar>::Vector> bias;

    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> flatten() const;
};

// Dense feed-forward network with at most one identity shortcut. The
// parameter vector lambda is the concatenation, layer by layer, of the
// row-major weights followed by the bias.
template <typename Scalar>
class BasicNetwork {
public:
    using Layer = DenseLayer<Scalar>;
    using Matrix = typename Layer::Matrix;
    using Vector = typename Layer::Vector;
    using Inputs = RowMatrixX<Scalar>;

    BasicNetwork() = default;

    BasicNetwork(std::vector<Layer> layers, std::optional<Shortcut> shortcut = std::nullopt)
        : layers_(std::move(layers)), shortcut_(shortcut) {
        validate();
    }

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }
    const std::optional<Shortcut>& shortcut() const { return shortcut_; }

    Eigen::Index input_dim() const { return layers_.front().in(); }
    Eigen::Index output_dim() const { return layers_.back().out(); }

    Eigen::Index parameter_count() const {
        Eigen::Index n = 0;
        for (const auto& l : layers_) n += l.parameter_count();
        return n;
    }

    Vector parameters() const {
        Vector out(parameter_count());
        Eigen::Index at = 0;
        for (const auto& l : layers_) {
            for (Eigen::Index r = 0; r < l.out(); ++r) {
                out.segment(at, l.in()) = l.weights.row(r).transpose();
                at += l.in();
            }
            out.segment(at, l.out()) = l.bias;
            at += l.out();
        }
        return out;
    }

    void set_parameters(const Vector& lambda) {
        if (lambda.size() != parameter_count())
            throw ArgumentError("set_parameters: expected " + std::to_string(parameter_count()) + " values, got " +
                                std::to_string(lambda.size()));
        Eigen::Index at = 0;
        for (auto& l : layers_) {
            for (Eigen::Index r = 0; r < l.out(); ++r) {
                l.weights.row(r) = lambda.segment(at, l.in()).transpose();
                at += l.in();
            }
            l.bias = lambda.segment(at, l.out());
            at += l.out();
        }
    }

    // Per-layer pre-activations and outputs for a batch stored column-wise.
    struct Trace {
        std::vector<Matrix> pre;     // z_l
        std::vector<Matrix> act;     // act_l(z_l)
        std::vector<Matrix> output;  // layer output (act, plus shortcut in post mode)
    };

    // inputs: d x B, one sample per column.
    Trace trace(const Matrix& inputs) const {
        if (inputs.rows() != input_dim())
            throw ArgumentError("forward: input width " + std::to_string(inputs.rows()) + ", network expects " +
                                std::to_string(input_dim()));
        Trace t;
        t.pre.reserve(layers_.size());
        t.act.reserve(layers_.size());
        t.output.reserve(layers_.size());
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const Matrix& below = l == 0 ? inputs : t.output[l - 1];
            Matrix z = layers_[l].weights * below;
            z.colwise() += layers_[l].bias;
            const bool joins = shortcut_ && shortcut_->to == l;
            if (joins && shortcut_->mode == ShortcutMode::pre_activation) z += t.output[shortcut_->from];
            t.act.push_back(activate(layers_[l].activation, z));
            t.pre.push_back(std::move(z));
            t.output.push_back(t.act.back());
            if (joins && shortcut_->mode == ShortcutMode::post_activation) t.output.back() += t.output[shortcut_->from];
        }
        return t;
    }

    // Row-wise network outputs, B x K.
    template <typename Derived>
    Inputs forward(const Eigen::MatrixBase<Derived>& inputs) const {
        const Matrix columns = inputs.transpose().template cast<Scalar>();
        return trace(columns).output.back().transpose();
    }

    // Lets a network act as a model callable in the stability verifiers.
    Inputs operator()(const Inputs& inputs) const { return forward(inputs); }

    // Backpropagate dLoss/d(output) (K x B), accumulating into `grad` (shapes
    // from zero_gradient()). With `is_last_delta` the matrix is already
    // dLoss/d(pre-activation) of the last layer, as in the fused sigmoid +
    // cross-entropy case; that form is not allowed when a post-activation
    // shortcut ends in the last layer.
    void backward(const Matrix& inputs, const Trace& t, Matrix d_output, NetworkGradient<Scalar>& grad,
                  bool is_last_delta = false) const {
        const std::size_t depth = layers_.size();
        if (is_last_delta && shortcut_ && shortcut_->to == depth - 1 &&
            shortcut_->mode == ShortcutMode::post_activation)
            throw ArgumentError("backward: fused output delta with a post-activation shortcut into the last layer");
        std::vector<Matrix> d_out(depth);
        d_out[depth - 1] = std::move(d_output);
        for (std::size_t l = depth; l-- > 0;) {
            if (d_out[l].size() == 0) d_out[l] = Matrix::Zero(layers_[l].out(), inputs.cols());
            const bool joins = shortcut_ && shortcut_->to == l;
            if (joins && shortcut_->mode == ShortcutMode::post_activation) add_to(d_out[shortcut_->from], d_out[l]);
            Matrix delta = is_last_delta && l == depth - 1
                               ? d_out[l]
                               : Matrix(d_out[l].cwiseProduct(activation_slope(layers_[l].activation, t.pre[l], t.act[l])));
            if (joins && shortcut_->mode == ShortcutMode::pre_activation) add_to(d_out[shortcut_->from], delta);
            accumulate_layer(l, l == 0 ? inputs : t.output[l - 1], delta, grad);
            if (l > 0) add_to(d_out[l - 1], layers_[l].weights.transpose() * delta);
        }
    }

    NetworkGradient<Scalar> zero_gradient() const {
        NetworkGradient<Scalar> g;
        for (const auto& l : layers_) {
            g.weights.push_back(Matrix::Zero(l.out(), l.in()));
            g.bias.push_back(Vector::Zero(l.out()));
        }
        return g;
    }

    // lambda <- lambda - step * grad, then optional projection onto [-box, box].
    void apply_update(const NetworkGradient<Scalar>& grad, Scalar step, std::optional<Scalar> box = std::nullopt) {
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            layers_[l].weights -= step * grad.weights[l];
            layers_[l].bias -= step * grad.bias[l];
            if (box) {
                layers_[l].weights = layers_[l].weights.cwiseMax(-*box).cwiseMin(*box);
                layers_[l].bias = layers_[l].bias.cwiseMax(-*box).cwiseMin(*box);
            }
        }
    }

    bool operator==(const BasicNetwork& other) const {
        if (layers_.size() != other.layers_.size()) return false;
        if (shortcut_.has_value() != other.shortcut_.has_value()) return false;
        if (shortcut_ && (shortcut_->from != other.shortcut_->from || shortcut_->to != other.shortcut_->to ||
                          shortcut_->mode != other.shortcut_->mode))
            return false;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const auto& a = layers_[l];
            const auto& b = other.layers_[l];
            if (a.activation != b.activation || a.weights.rows() != b.weights.rows() ||
                a.weights.cols() != b.weights.cols() || a.weights != b.weights || a.bias != b.bias)
                return false;
        }
        return true;
    }

private:
    static void add_to(Matrix& target, const Matrix& value) {
        if (target.size() == 0) {
            target = value;
        } else {
            target += value;
        }
    }

    static void accumulate_layer(std::size_t l, const Matrix& below, const Matrix& delta, NetworkGradient<Scalar>& grad) {
        grad.weights[l].noalias() += delta * below.transpose();
        grad.bias[l] += delta.rowwise().sum();
    }

    void validate() const {
        if (layers_.empty()) throw ArgumentError("network: no layers");
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const auto& layer = layers_[l];
            if (layer.in() == 0 || layer.out() == 0) throw ArgumentError("network: zero-size layer " + std::to_string(l));
            if (layer.bias.size() != layer.out()) throw ArgumentError("network: bias size mismatch in layer " + std::to_string(l));
            if (l > 0 && layer.in() != layers_[l - 1].out())
                throw ArgumentError("network: layer " + std::to_string(l) + " expects " + std::to_string(layer.in()) +
                                    " inputs, previous layer gives " + std::to_string(layers_[l - 1].out()));
        }
        if (shortcut_) {
            if (shortcut_->from >= shortcut_->to || shortcut_->to >= layers_.size())
                throw ArgumentError("network: shortcut must run forward between existing layers");
            if (layers_[shortcut_->from].out() != layers_[shortcut_->to].out())
                throw ArgumentError("network: shortcut endpoints have widths " +
                                    std::to_string(layers_[shortcut_->from].out()) + " and " +
                                    std::to_string(layers_[shortcut_->to].out()));
        }
    }

    std::vector<Layer> layers_;
    std::optional<Shortcut> shortcut_;
};

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> NetworkGradient<Scalar>::flatten() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + bias[l].size();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
    Eigen::Index at = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (Eigen::Index r = 0; r < weights[l].rows(); ++r) {
            out.segment(at, weights[l].cols()) = weights[l].row(r).transpose();
            at += weights[l].cols();
        }
        out.segment(at, bias[l].size()) = bias[l];
        at += bias[l].size();
    }
    return out;
}

using Network = BasicNetwork<double>;

enum class Architecture { mlp, residual };

inline std::string_view to_string(Architecture a) { return a == Architecture::mlp ? "mlp" : "residual"; }

inline Architecture parse_architecture(std::string_view s) {
    if (s == "mlp") return Architecture::mlp;
    if (s == "residual" || s == "resnet") return Architecture::residual;
    throw ArgumentError("unknown architecture '" + std::string(s) + "'");
}

inline std::vector<std::size_t> default_dims(Architecture a, std::size_t input_dim, std::size_t classes = 10) {
    if (a == Architecture::mlp) return {input_dim, 25, classes};
    return {input_dim, 64, 64, classes};
}

// mlp: sigmoid on every layer. residual: ReLU hidden layers, sigmoid output,
// identity shortcut from the first hidden layer into the second (widths must
// match). Weights ~ U[-r, r] with r = sqrt(6 / (fan_in + fan_out)), zero biases.
template <typename Scalar = double>
BasicNetwork<Scalar> init_network(Architecture arch, std::span<const std::size_t> dims, std::uint64_t seed,
                                  ShortcutMode mode = ShortcutMode::pre_activation) {
    if (dims.size() < 2) throw ArgumentError("init_network: need at least input and output sizes");
    for (const auto d : dims)
        if (d == 0) throw ArgumentError("init_network: zero-size layer");
    if (arch == Architecture::residual && dims.size() < 4)
        throw ArgumentError("init_network: residual net needs input, two hidden and output sizes");

    Xoshiro256 rng(derive_seed(seed, 0));
    std::vector<DenseLayer<Scalar>> layers;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const auto in = static_cast<Eigen::Index>(dims[l]);
        const auto out = static_cast<Eigen::Index>(dims[l + 1]);
        DenseLayer<Scalar> layer;
        const double r = std::sqrt(6.0 / static_cast<double>(in + out));
        layer.weights.resize(out, in);
        for (Eigen::Index i = 0; i < out; ++i)
            for (Eigen::Index j = 0; j < in; ++j) layer.weights(i, j) = Scalar(rng.uniform(-r, r));
        layer.bias = DenseLayer<Scalar>::Vector::Zero(out);
        const bool last = l + 2 == dims.size();
        layer.activation = last || arch == Architecture::mlp ? Activation::sigmoid : Activation::relu;
        layers.push_back(std::move(layer));
    }
    std::optional<Shortcut> shortcut;
    if (arch == Architecture::residual) shortcut = Shortcut{0, 1, mode};
    return BasicNetwork<Scalar>(std::move(layers), shortcut);
}

template <typename Scalar = double>
BasicNetwork<Scalar> init_network(Architecture arch, std::initializer_list<std::size_t> dims, std::uint64_t seed,
                                  ShortcutMode mode = ShortcutMode::pre_activation) {
    return init_network<Scalar>(arch, std::span<const std::size_t>(dims.begin(), dims.size()), seed, mode);
}

}  // namespace mct::nn
