#include <charconv>
#include <fstream>
#include <sstream>

#include "mct/nn/train.hpp"
#include "mct/text.hpp"

namespace mct::nn {
namespace {

constexpr const char* kHeader = "mct-network";
constexpr int kVersion = 1;

double parse_double(const std::string& token) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw FormatError("checkpoint: bad number '" + token + "'");
    return v;
}

template <typename T>
T expect(std::istream& in, const char* what) {
    T value{};
    if (!(in >> value)) throw FormatError(std::string("checkpoint: missing ") + what);
    return value;
}

void expect_word(std::istream& in, const std::string& word) {
    const auto got = expect<std::string>(in, word.c_str());
    if (got != word) throw FormatError("checkpoint: expected '" + word + "', found '" + got + "'");
}

}  // namespace

void save_checkpoint(std::ostream& out, const Network& net) {
    out << kHeader << ' ' << kVersion << '\n';
    out << "layers " << net.layers().size() << '\n';
    if (const auto& sc = net.shortcut()) {
        out << "shortcut " << sc->from << ' ' << sc->to << ' '
            << (sc->mode == ShortcutMode::pre_activation ? "pre" : "post") << '\n';
    } else {
        out << "shortcut none\n";
    }
    for (const auto& layer : net.layers()) {
        out << "layer " << layer.in() << ' ' << layer.out() << ' ' << to_string(layer.activation) << '\n';
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
                out << (c ? " " : "") << format_double(layer.weights(r, c));
            out << '\n';
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out << (r ? " " : "") << format_double(layer.bias(r));
        out << '\n';
    }
}

void save_checkpoint(const std::filesystem::path& path, const Network& net) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());
    save_checkpoint(out, net);
    if (!out) throw IoError("write failed: " + path.string());
}

Network load_checkpoint(std::istream& in) {
    expect_word(in, kHeader);
    if (expect<int>(in, "version") != kVersion) throw FormatError("checkpoint: unsupported version");
    expect_word(in, "layers");
    const auto count = expect<std::size_t>(in, "layer count");
    expect_word(in, "shortcut");
    std::optional<Shortcut> shortcut;
    const auto first = expect<std::string>(in, "shortcut");
    if (first != "none") {
        Shortcut sc;
        const auto res = std::from_chars(first.data(), first.data() + first.size(), sc.from);
        if (res.ec != std::errc{} || res.ptr != first.data() + first.size())
            throw FormatError("checkpoint: bad shortcut source '" + first + "'");
        sc.to = expect<std::size_t>(in, "shortcut target");
        const auto mode = expect<std::string>(in, "shortcut mode");
        if (mode != "pre" && mode != "post") throw FormatError("checkpoint: bad shortcut mode '" + mode + "'");
        sc.mode = mode == "pre" ? ShortcutMode::pre_activation : ShortcutMode::post_activation;
        shortcut = sc;
    }
    std::vector<DenseLayer<double>> layers;
    for (std::size_t l = 0; l < count; ++l) {
        expect_word(in, "layer");
        const auto n_in = expect<Eigen::Index>(in, "layer input size");
        const auto n_out = expect<Eigen::Index>(in, "layer output size");
        DenseLayer<double> layer;
        layer.activation = parse_activation(expect<std::string>(in, "activation"));
        layer.weights.resize(n_out, n_in);
        layer.bias.resize(n_out);
        for (Eigen::Index r = 0; r < n_out; ++r)
            for (Eigen::Index c = 0; c < n_in; ++c) layer.weights(r, c) = parse_double(expect<std::string>(in, "weight"));
        for (Eigen::Index r = 0; r < n_out; ++r) layer.bias(r) = parse_double(expect<std::string>(in, "bias"));
        layers.push_back(std::move(layer));
    }
    return Network(std::move(layers), shortcut);
}

Network load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return load_checkpoint(in);
}

}  // namespace mct::nn
