#include "mct/exp/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "mct/data/idx.hpp"
#include "mct/dfe/dfe.hpp"
#include "mct/error.hpp"
#include "mct/exp/svg.hpp"
#include "mct/nn/train.hpp"
#include "mct/rng.hpp"
#include "mct/text.hpp"

namespace mct::exp {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kShuffleTag = 10;
constexpr std::uint64_t kSplitTag = 20;
constexpr const char* kValidationName = "validation";

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

json describe(const fs::path& dir, const data::LabeledDataset& d) {
    return {{"name", d.name},
            {"size", d.size()},
            {"source_sigma", d.source_sigma},
            {"inputs_checksum", hex64(data::file_checksum(dir / (d.name + "-inputs.idx")))},
            {"labels_checksum", hex64(data::file_checksum(dir / (d.name + "-labels.idx")))}};
}

data::LabeledDataset load_checked(const fs::path& dir, const json& entry) {
    const auto name = entry.at("name").get<std::string>();
    for (const char* kind : {"inputs", "labels"}) {
        const fs::path file = dir / (name + "-" + kind + ".idx");
        if (!fs::exists(file)) throw IoError("prepared file missing: " + file.string());
        const auto expected = entry.at(std::string(kind) + "_checksum").get<std::string>();
        if (hex64(data::file_checksum(file)) != expected)
            throw ConsistencyError("checksum mismatch for " + file.string() + " (manifest " + expected + ")");
    }
    auto d = data::load_dataset(dir, name, entry.at("source_sigma").get<double>());
    if (d.size() != entry.at("size").get<std::size_t>())
        throw ConsistencyError("prepared dataset " + name + " has " + std::to_string(d.size()) +
                               " rows, manifest says " + entry.at("size").dump());
    return d;
}

std::string run_dir_name(double epsilon, std::uint64_t seed) {
    return "eps_" + format_double(epsilon) + "_seed_" + std::to_string(seed);
}

struct Stats {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n = 0;
};

Stats stats(const std::vector<double>& xs) {
    Stats s;
    s.n = xs.size();
    if (xs.empty()) return {std::nan(""), std::nan(""), 0};
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (const double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

std::string sweep_chart(const std::vector<double>& eps, const std::vector<double>& values, double benchmark,
                        const std::string& title, const std::string& y_label) {
    LineChart chart{title, "epsilon", y_label, {}};
    Series sweep{"sweep (epsilon > 0)", "#1f77b4", {}, {}};
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (eps[i] > 0.0 && std::isfinite(values[i])) {
            sweep.xs.push_back(eps[i]);
            sweep.ys.push_back(values[i]);
        }
    }
    double lo = 0.0, hi = 0.0;
    if (!sweep.xs.empty()) {
        lo = sweep.xs.front();
        hi = sweep.xs.back();
    }
    Series bench{"benchmark (epsilon = 0)", "#d62728", {lo, hi}, {benchmark, benchmark}};
    chart.series = {std::move(sweep), std::move(bench)};
    return render_svg(chart);
}

double parse_number(const std::string& s, const fs::path& file, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    if (s == "nan") return std::nan("");
    throw FormatError(file.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
}

}  // namespace

PreparedData cmd_prepare(const ExperimentConfig& config) {
    config.validate();
    const fs::path images = config.data_dir / config.images_file;
    const fs::path labels = config.data_dir / config.labels_file;
    auto raw = data::load_idx(images, labels);
    if (config.crop20) raw = data::center_crop(raw, 20, 20);
    const auto all = data::normalize(raw);

    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::uint64_t shuffle_seed = derive_seed(config.seed, kShuffleTag);
    Xoshiro256 rng(shuffle_seed);
    shuffle(std::span<std::size_t>(order), rng);
    if (config.sample_count) {
        if (*config.sample_count > order.size())
            throw ArgumentError("sample_count " + std::to_string(*config.sample_count) + " exceeds the " +
                                std::to_string(order.size()) + " available samples");
        order.resize(*config.sample_count);
    }
    const auto n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(order.size())));
    if (n_val == 0 || n_val >= order.size())
        throw ArgumentError("validation_fraction leaves an empty validation or training set");
    if (order.size() - n_val < config.parts)
        throw ArgumentError("fewer training samples than parts");

    PreparedData out;
    out.validation = data::take_rows(all, std::span(order).first(n_val), kValidationName);
    const auto pool = data::take_rows(all, std::span(order).subspan(n_val), "train");
    const std::uint64_t split_seed = derive_seed(config.seed, kSplitTag);
    out.parts = data::make_subsets(pool, {config.parts, split_seed, config.sigmas});

    const fs::path dir = config.out_dir / "prepared";
    fs::create_directories(dir);
    json manifest;
    manifest["format"] = "mct-prepared 1";
    manifest["seed"] = config.seed;
    manifest["shuffle_seed"] = shuffle_seed;
    manifest["split_seed"] = split_seed;
    manifest["source"] = {{"images", config.images_file},
                          {"labels", config.labels_file},
                          {"images_checksum", hex64(data::file_checksum(images))},
                          {"labels_checksum", hex64(data::file_checksum(labels))},
                          {"count", raw.count},
                          {"image_rows", raw.rows},
                          {"image_cols", raw.cols}};
    manifest["sample_count"] = order.size();
    manifest["validation_fraction"] = config.validation_fraction;
    manifest["crop20"] = config.crop20;
    json parts = json::array();
    for (std::size_t i = 0; i < out.parts.size(); ++i) {
        data::save_dataset(dir, out.parts[i]);
        auto entry = describe(dir, out.parts[i]);
        entry["noise_seed"] = derive_seed(split_seed, 100 + i);
        parts.push_back(entry);
    }
    manifest["parts"] = parts;
    data::save_dataset(dir, out.validation);
    manifest["validation"] = describe(dir, out.validation);
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    return out;
}

PreparedData load_prepared(const fs::path& out_dir) {
    const fs::path dir = out_dir / "prepared";
    const fs::path manifest_path = dir / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw IoError("no prepared data at " + dir.string() + " (run prepare first)");
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(manifest_path.string() + ": " + e.what());
    }
    PreparedData out;
    try {
        for (const auto& entry : manifest.at("parts")) out.parts.push_back(load_checked(dir, entry));
        out.validation = load_checked(dir, manifest.at("validation"));
    } catch (const json::exception& e) {
        throw FormatError(manifest_path.string() + ": " + e.what());
    }
    if (out.parts.empty()) throw FormatError(manifest_path.string() + ": no parts");
    return out;
}

RunResult cmd_train(const ExperimentConfig& config, const PreparedData& data, double epsilon, std::uint64_t seed) {
    if (data.parts.size() != config.parts)
        throw ArgumentError("prepared data has " + std::to_string(data.parts.size()) + " parts, config expects " +
                            std::to_string(config.parts));
    const auto weights = dfe::epsilon_weights(data.parts.size(), epsilon);
    const auto start = std::chrono::steady_clock::now();

    const auto& first = data.parts.front();
    const auto dims = config.layer_dims(first.input_dim(), first.classes());
    auto net = nn::init_network(config.arch, dims, seed, config.shortcut_mode);

    nn::TrainConfig tc;
    tc.datasets = data.parts;
    tc.metric = config.metric;
    tc.weights = weights;
    tc.epochs = config.epochs;
    tc.batch_size = config.batch_size;
    tc.learning_rate = config.effective_learning_rate();
    tc.seed = seed;
    const auto trained = nn::sgd_train(std::move(net), tc);

    RunResult r;
    r.epsilon = epsilon;
    r.seed = seed;
    r.arch = std::string(nn::to_string(config.arch));
    r.part_accuracy = trained.history.train_accuracy;
    double correct = 0.0, total = 0.0;
    for (std::size_t i = 0; i < data.parts.size(); ++i) {
        correct += r.part_accuracy[i] * static_cast<double>(data.parts[i].size());
        total += static_cast<double>(data.parts[i].size());
    }
    r.train_accuracy = correct / total;
    r.validation_accuracy = nn::accuracy(trained.network, data.validation);
    r.final_loss = trained.history.loss.empty() ? trained.history.initial_loss : trained.history.loss.back();

    const fs::path dir = config.out_dir / "runs" / run_dir_name(epsilon, seed);
    fs::create_directories(dir);
    nn::save_checkpoint(dir / "checkpoint.txt", trained.network);
    std::vector<std::string> names;
    for (const auto& p : data.parts) names.push_back(p.name);
    std::ostringstream history;
    nn::write_history_csv(history, trained.history, names);
    write_text(dir / "history.csv", history.str());

    json summary;
    summary["epsilon"] = epsilon;
    summary["seed"] = seed;
    summary["arch"] = r.arch;
    summary["metric"] = std::string(dfe::to_string(config.metric));
    summary["weights"] = std::vector<double>(weights.betas().begin(), weights.betas().end());
    json parts = json::object();
    for (std::size_t i = 0; i < names.size(); ++i) parts[names[i]] = r.part_accuracy[i];
    summary["part_accuracy"] = parts;
    summary["train_accuracy"] = r.train_accuracy;
    summary["validation_accuracy"] = r.validation_accuracy;
    summary["final_loss"] = r.final_loss;
    write_text(dir / "summary.json", summary.dump(2) + "\n");

    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

RunResult cmd_train(const ExperimentConfig& config, double epsilon) {
    config.validate();
    dfe::epsilon_weights(config.parts, epsilon);  // refuse before touching the data
    return cmd_train(config, load_prepared(config.out_dir), epsilon, config.seed);
}

SweepResult cmd_sweep(const ExperimentConfig& config) {
    config.validate();
    const auto data = load_prepared(config.out_dir);

    std::vector<double> grid{0.0};
    for (const double e : config.epsilons)
        if (e != 0.0) grid.push_back(e);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    auto seeds = config.effective_seeds();
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

    SweepResult result;
    for (const double e : grid)
        for (const auto s : seeds) {
            RunResult r;
            r.epsilon = e;
            r.seed = s;
            r.arch = std::string(nn::to_string(config.arch));
            result.rows.push_back(r);
        }

    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < result.rows.size(); i = next++) {
            auto& row = result.rows[i];
            try {
                row = cmd_train(config, data, row.epsilon, row.seed);
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
            }
        }
    };
    const std::size_t workers = std::min(config.threads, result.rows.size());
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    const auto num = [](const RunResult& r, double v) { return r.ok ? format_double(v) : std::string("nan"); };
    std::ostringstream sweep, detail, timings, summary;
    sweep << kSweepHeader << '\n';
    detail << "epsilon,seed,arch";
    for (const auto& p : data.parts) detail << ",acc_" << p.name;
    detail << ",train_acc,val_acc,final_loss,status,error\n";
    timings << "epsilon,seed,seconds\n";
    for (const auto& r : result.rows) {
        sweep << format_double(r.epsilon) << ',' << r.seed << ',' << r.arch << ',' << num(r, r.train_accuracy) << ','
              << num(r, r.validation_accuracy) << ',' << num(r, r.final_loss) << '\n';
        detail << format_double(r.epsilon) << ',' << r.seed << ',' << r.arch;
        for (std::size_t i = 0; i < data.parts.size(); ++i)
            detail << ',' << (r.ok ? format_double(r.part_accuracy[i]) : "nan");
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        detail << ',' << num(r, r.train_accuracy) << ',' << num(r, r.validation_accuracy) << ','
               << num(r, r.final_loss) << ',' << (r.ok ? "ok" : "failed") << ',' << err << '\n';
        timings << format_double(r.epsilon) << ',' << r.seed << ',' << format_fixed(r.seconds, 3) << '\n';
    }

    summary << "epsilon,runs,train_mean,train_std,val_mean,val_std\n";
    std::vector<double> eps_axis, train_mean, val_mean;
    for (const double e : grid) {
        std::vector<double> tr, va;
        for (const auto& r : result.rows)
            if (r.epsilon == e && r.ok) {
                tr.push_back(r.train_accuracy);
                va.push_back(r.validation_accuracy);
            }
        const auto ts = stats(tr), vs = stats(va);
        summary << format_double(e) << ',' << ts.n << ',' << format_double(ts.mean) << ',' << format_double(ts.sd)
                << ',' << format_double(vs.mean) << ',' << format_double(vs.sd) << '\n';
        eps_axis.push_back(e);
        train_mean.push_back(ts.mean);
        val_mean.push_back(vs.mean);
    }

    const fs::path out = config.out_dir;
    write_text(out / "sweep.csv", sweep.str());
    write_text(out / "sweep_detail.csv", detail.str());
    write_text(out / "sweep_summary.csv", summary.str());
    write_text(out / "timings.csv", timings.str());
    write_text(out / "sweep_train.svg",
               sweep_chart(eps_axis, train_mean, train_mean.front(), "Training accuracy vs epsilon", "training accuracy"));
    write_text(out / "sweep_val.svg", sweep_chart(eps_axis, val_mean, val_mean.front(), "Validation accuracy vs epsilon",
                                                  "validation accuracy"));
    return result;
}

Report cmd_report(const fs::path& sweep_csv) {
    std::ifstream in(sweep_csv);
    if (!in) throw IoError("cannot open " + sweep_csv.string());
    std::string line;
    if (!std::getline(in, line) || line != kSweepHeader)
        throw FormatError(sweep_csv.string() + ": expected header '" + kSweepHeader + "'");

    std::map<double, std::vector<std::pair<double, double>>> by_eps;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (cells.size() != 6) throw FormatError(sweep_csv.string() + ":" + std::to_string(line_no) + ": expected 6 columns");
        const double eps = parse_number(cells[0], sweep_csv, line_no);
        const double train = parse_number(cells[3], sweep_csv, line_no);
        const double val = parse_number(cells[4], sweep_csv, line_no);
        auto& bucket = by_eps[eps];
        if (std::isfinite(train) && std::isfinite(val)) bucket.emplace_back(train, val);
    }

    const auto row_for = [](double eps, const std::vector<std::pair<double, double>>& runs) {
        ReportRow r;
        r.epsilon = eps;
        r.seeds = runs.size();
        for (const auto& [t, v] : runs) {
            r.train += t;
            r.validation += v;
        }
        if (!runs.empty()) {
            r.train /= static_cast<double>(runs.size());
            r.validation /= static_cast<double>(runs.size());
        }
        return r;
    };

    const auto bench = by_eps.find(0.0);
    if (bench == by_eps.end() || bench->second.empty())
        throw DataError(sweep_csv.string() + ": no successful benchmark (epsilon = 0) row");

    Report report;
    report.benchmark = row_for(0.0, bench->second);
    report.best = report.benchmark;
    for (const auto& [eps, runs] : by_eps) {  // ascending, so ties keep the smaller epsilon
        if (runs.empty()) continue;
        const auto row = row_for(eps, runs);
        if (row.train > report.best.train) report.best = row;
    }

    std::ostringstream t;
    t << "| epsilon | training | validation | seeds |\n";
    t << "|---:|---:|---:|---:|\n";
    for (const auto& r : {report.benchmark, report.best})
        t << "| " << format_double(r.epsilon) << " | " << format_fixed(r.train, 4) << " | "
          << format_fixed(r.validation, 4) << " | " << r.seeds << " |\n";
    t << "\nBest training epsilon " << format_double(report.best.epsilon) << ": training "
      << (report.best.train > report.benchmark.train ? "above" : "not above") << " the benchmark, validation "
      << (report.best.validation > report.benchmark.validation ? "above" : "not above") << " the benchmark.\n";
    report.table = t.str();
    return report;
}

SuiteResult cmd_verify(std::string_view suite, std::size_t trials, std::uint64_t seed, const fs::path& out_dir) {
    auto result = run_suite(suite, trials, seed);
    write_text(out_dir / ("verify_" + result.name + ".csv"), result.csv);
    return result;
}

}  // namespace mct::exp
