#include "mct/exp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "mct/dfe/dfe.hpp"
#include "mct/text.hpp"

namespace mct::exp {
namespace {

void reject_unknown(const toml::table& table, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : table) {
        if (!allowed.contains(std::string(key.str())))
            throw ArgumentError(where + ": unknown key '" + std::string(key.str()) + "'");
    }
}

template <typename T>
std::optional<T> get(const toml::table& table, const char* key, const std::string& where) {
    const auto* node = table.get(key);
    if (!node) return std::nullopt;
    if constexpr (std::is_same_v<T, double>) {
        if (auto v = node->value<double>()) return *v;  // also accepts integers
    } else if constexpr (std::is_same_v<T, std::int64_t>) {
        if (auto v = node->value<std::int64_t>()) return *v;
    } else {
        if (auto v = node->value<T>()) return *v;
    }
    throw ArgumentError(where + "." + key + ": wrong type");
}

std::size_t get_count(const toml::table& table, const char* key, const std::string& where, std::size_t fallback) {
    const auto v = get<std::int64_t>(table, key, where);
    if (!v) return fallback;
    if (*v < 0) throw ArgumentError(where + "." + key + ": must be nonnegative");
    return static_cast<std::size_t>(*v);
}

template <typename T>
std::optional<std::vector<T>> get_array(const toml::table& table, const char* key, const std::string& where) {
    const auto* node = table.get(key);
    if (!node) return std::nullopt;
    const auto* arr = node->as_array();
    if (!arr) throw ArgumentError(where + "." + key + ": expected an array");
    std::vector<T> out;
    for (const auto& item : *arr) {
        if constexpr (std::is_same_v<T, double>) {
            const auto v = item.value<double>();
            if (!v) throw ArgumentError(where + "." + key + ": expected numbers");
            out.push_back(*v);
        } else {
            const auto v = item.value<std::int64_t>();
            if (!v || *v < 0) throw ArgumentError(where + "." + key + ": expected nonnegative integers");
            out.push_back(static_cast<T>(*v));
        }
    }
    return out;
}

const toml::table* section(const toml::table& root, const char* name) {
    const auto* node = root.get(name);
    if (!node) return nullptr;
    const auto* t = node->as_table();
    if (!t) throw ArgumentError(std::string("[") + name + "] must be a table");
    return t;
}

std::string toml_float(double v) {
    std::string s = format_double(v);
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

std::string toml_list(const std::vector<double>& values) {
    std::string s = "[";
    for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ", " : "") + toml_float(values[i]);
    return s + "]";
}

template <typename T>
std::string toml_int_list(const std::vector<T>& values) {
    std::string s = "[";
    for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ", " : "") + std::to_string(values[i]);
    return s + "]";
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::vector<std::size_t> ExperimentConfig::layer_dims(std::size_t input_dim, std::size_t classes) const {
    if (hidden.empty()) return nn::default_dims(arch, input_dim, classes);
    std::vector<std::size_t> dims{input_dim};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(classes);
    return dims;
}

void ExperimentConfig::validate() const {
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw ArgumentError("validation_fraction must lie in (0, 1)");
    if (parts == 0) throw ArgumentError("split.parts must be >= 1");
    if (sigmas.size() != parts)
        throw ArgumentError("split.sigmas has " + std::to_string(sigmas.size()) + " entries for " +
                            std::to_string(parts) + " parts");
    for (const double s : sigmas)
        if (!(s >= 0.0)) throw ArgumentError("split.sigmas must be nonnegative");
    if (epochs == 0 || batch_size == 0) throw ArgumentError("train.epochs and train.batch_size must be >= 1");
    if (!(effective_learning_rate() > 0.0)) throw ArgumentError("train.learning_rate must be positive");
    if (threads == 0) throw ArgumentError("sweep.threads must be >= 1");
    if (sample_count && *sample_count == 0) throw ArgumentError("data.sample_count must be positive");
    if (arch == nn::Architecture::residual) {
        const auto dims = layer_dims(1, 10);
        if (dims.size() < 4 || dims[1] != dims[2])
            throw ArgumentError("residual architecture needs two hidden layers of equal width");
    }
    for (const double e : epsilons) dfe::epsilon_weights(parts, e);
}

ExperimentConfig parse_config(std::string_view toml_text, const std::string& source) {
    toml::table root;
    try {
        root = toml::parse(toml_text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << source << ": " << e.description() << " (line " << e.source().begin.line << ")";
        throw ArgumentError(msg.str());
    }
    reject_unknown(root, source, {"seed", "out_dir", "data", "split", "train", "sweep"});

    ExperimentConfig c;
    if (auto v = get<std::int64_t>(root, "seed", source)) c.seed = static_cast<std::uint64_t>(*v);
    if (auto v = get<std::string>(root, "out_dir", source)) c.out_dir = *v;

    if (const auto* t = section(root, "data")) {
        const std::string where = source + " [data]";
        reject_unknown(*t, where, {"dir", "images", "labels", "sample_count", "validation_fraction", "crop20"});
        if (auto v = get<std::string>(*t, "dir", where)) c.data_dir = *v;
        if (auto v = get<std::string>(*t, "images", where)) c.images_file = *v;
        if (auto v = get<std::string>(*t, "labels", where)) c.labels_file = *v;
        if (t->get("sample_count")) c.sample_count = get_count(*t, "sample_count", where, 0);
        if (auto v = get<double>(*t, "validation_fraction", where)) c.validation_fraction = *v;
        if (auto v = get<bool>(*t, "crop20", where)) c.crop20 = *v;
    }
    if (const auto* t = section(root, "split")) {
        const std::string where = source + " [split]";
        reject_unknown(*t, where, {"parts", "sigmas"});
        c.parts = get_count(*t, "parts", where, c.parts);
        if (auto v = get_array<double>(*t, "sigmas", where)) c.sigmas = *v;
    }
    if (const auto* t = section(root, "train")) {
        const std::string where = source + " [train]";
        reject_unknown(*t, where,
                       {"arch", "hidden", "shortcut", "metric", "epochs", "batch_size", "learning_rate"});
        if (auto v = get<std::string>(*t, "arch", where)) c.arch = nn::parse_architecture(*v);
        if (auto v = get_array<std::size_t>(*t, "hidden", where)) c.hidden = *v;
        if (auto v = get<std::string>(*t, "shortcut", where)) {
            if (*v != "pre" && *v != "post") throw ArgumentError(where + ".shortcut: expected \"pre\" or \"post\"");
            c.shortcut_mode = *v == "pre" ? nn::ShortcutMode::pre_activation : nn::ShortcutMode::post_activation;
        }
        if (auto v = get<std::string>(*t, "metric", where)) c.metric = dfe::parse_metric(*v);
        c.epochs = get_count(*t, "epochs", where, c.epochs);
        c.batch_size = get_count(*t, "batch_size", where, c.batch_size);
        if (auto v = get<double>(*t, "learning_rate", where)) c.learning_rate = *v;
    }
    if (const auto* t = section(root, "sweep")) {
        const std::string where = source + " [sweep]";
        reject_unknown(*t, where, {"epsilons", "seeds", "threads"});
        if (auto v = get_array<double>(*t, "epsilons", where)) c.epsilons = *v;
        if (auto v = get_array<std::uint64_t>(*t, "seeds", where)) c.seeds = *v;
        c.threads = get_count(*t, "threads", where, c.threads);
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string());
}

std::string to_toml(const ExperimentConfig& c) {
    std::ostringstream s;
    s << "seed = " << c.seed << '\n';
    s << "out_dir = " << quoted(c.out_dir.string()) << "\n\n";
    s << "[data]\n";
    s << "dir = " << quoted(c.data_dir.string()) << '\n';
    s << "images = " << quoted(c.images_file) << '\n';
    s << "labels = " << quoted(c.labels_file) << '\n';
    if (c.sample_count) s << "sample_count = " << *c.sample_count << '\n';
    s << "validation_fraction = " << toml_float(c.validation_fraction) << '\n';
    s << "crop20 = " << (c.crop20 ? "true" : "false") << "\n\n";
    s << "[split]\n";
    s << "parts = " << c.parts << '\n';
    s << "sigmas = " << toml_list(c.sigmas) << "\n\n";
    s << "[train]\n";
    s << "arch = " << quoted(std::string(nn::to_string(c.arch))) << '\n';
    if (!c.hidden.empty()) s << "hidden = " << toml_int_list(c.hidden) << '\n';
    s << "shortcut = " << (c.shortcut_mode == nn::ShortcutMode::pre_activation ? "\"pre\"" : "\"post\"") << '\n';
    s << "metric = " << quoted(std::string(dfe::to_string(c.metric))) << '\n';
    s << "epochs = " << c.epochs << '\n';
    s << "batch_size = " << c.batch_size << '\n';
    if (c.learning_rate) s << "learning_rate = " << toml_float(*c.learning_rate) << '\n';
    s << "\n[sweep]\n";
    s << "epsilons = " << toml_list(c.epsilons) << '\n';
    if (!c.seeds.empty()) s << "seeds = " << toml_int_list(c.seeds) << '\n';
    s << "threads = " << c.threads << '\n';
    return s.str();
}

}  // namespace mct::exp
